"""Spin-singlet predictions at three analyzer angles.

For each angle triple the script prints the pairwise tables, the Bell and
Wigner reports, and whether the three tables admit a joint distribution.
When they do not, the minimal negative mass of a signed joint measures how
far they are from a single probability space.
"""

import math

from bellcompat import (
    AngleSet,
    bell_covariance,
    check_compatibility,
    singlet_correlation,
    singlet_family,
    singlet_pair_table,
    solve_quasi,
    wigner,
)


def report(a_deg, b_deg, c_deg):
    a, b, c = (math.radians(x) for x in (a_deg, b_deg, c_deg))
    bell = bell_covariance(singlet_correlation(a, b), singlet_correlation(c, b), singlet_correlation(a, c))
    w = wigner(singlet_pair_table(a, b).prob(1, 1), singlet_pair_table(b, c).prob(-1, 1),
               singlet_pair_table(a, c).prob(1, 1))
    family = singlet_family(AngleSet((a, b, c)))
    verdict = check_compatibility(family)
    neg = solve_quasi(family).negativity if not verdict.feasible else 0
    print(f"({a_deg:>5}, {b_deg:>5}, {c_deg:>5})  bell margin {bell.margin:+.4f}  "
          f"wigner margin {w.margin:+.4f}  joint {verdict.status.value:<10}  negativity {float(neg):.4f}")


print("P(+,+) at (0, 60):", singlet_pair_table(0, math.radians(60)).p)
print()
for triple in [(0, 60, 30), (0, 30, 60), (0, 45, 22.5), (0, 90, 45), (0, 120, 60), (0, 10, 5)]:
    report(*triple)
