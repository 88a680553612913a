import random
from fractions import Fraction

import pytest

from bellcompat import MarginalFamily, PairwiseTable

HALF, ZERO, QUARTER = Fraction(1, 2), Fraction(0), Fraction(1, 4)


def contradictory_tables():
    """The three-variable family with <a1,a2> = <a1,a3> = 1 and <a2,a3> = -1."""
    return [
        PairwiseTable((0, 1), (HALF, ZERO, ZERO, HALF)),
        PairwiseTable((0, 2), (HALF, ZERO, ZERO, HALF)),
        PairwiseTable((1, 2), (ZERO, HALF, HALF, ZERO)),
    ]


@pytest.fixture
def contradictory_family():
    return MarginalFamily(3, contradictory_tables())


@pytest.fixture
def uniform_family():
    return MarginalFamily(3, [PairwiseTable(p, (QUARTER,) * 4) for p in [(0, 1), (0, 2), (1, 2)]])


def random_rational_family(rng: random.Random, n: int = 3, grid: int = 10) -> MarginalFamily:
    """Valid family with grid-rational marginals and P(+,+) anywhere in its Frechet range.

    Roughly half of these are incompatible.
    """
    m = [Fraction(rng.randint(1, grid - 1), grid) for _ in range(n)]
    tables = []
    for i in range(n):
        for j in range(i + 1, n):
            lo = max(Fraction(0), m[i] + m[j] - 1)
            hi = min(m[i], m[j])
            steps = int((hi - lo) * grid * 2)
            pp = lo + Fraction(rng.randint(0, steps), grid * 2)
            tables.append(PairwiseTable((i, j), (pp, m[i] - pp, m[j] - pp, 1 - m[i] - m[j] + pp)))
    return MarginalFamily(n, tables)


def random_joint(rng, n, exact=True):
    """Random nonnegative joint over 2**n atoms (rational or float weights)."""
    from bellcompat import SignedJoint

    if exact:
        raw = [rng.randint(0, 20) for _ in range(1 << n)]
        if not any(raw):
            raw[0] = 1
        total = sum(raw)
        return SignedJoint(n, [Fraction(x, total) for x in raw])
    raw = [rng.random() ** 3 for _ in range(1 << n)]
    total = sum(raw)
    return SignedJoint(n, [x / total for x in raw])
