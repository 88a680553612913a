"""Pooling runs whose hidden distribution drifts.

Both stations report the sign of a shared hidden value. Even runs draw it
from a point mass at +1, odd runs from a density putting 3/4 on -1.
Each run is a perfectly valid local experiment, yet the pooled frequencies
match none of them.
"""

import math

from bellcompat import (
    ContextSpec,
    DiscreteDensity,
    RunDriftSpec,
    UniformDensity,
    alternating_drift,
    pool_records,
    post_select,
    run_with_drift,
    shared_sign,
)

base = ContextSpec((0.0, math.radians(30)), UniformDensity(-1, 1), shared_sign)
drift = alternating_drift(DiscreteDensity([1.0], [1.0]), DiscreteDensity([-1.0, 1.0], [0.75, 0.25]))
runs = run_with_drift(RunDriftSpec(base, 6, drift), 50_000, seed=1)
records = [post_select(s)[0] for s in runs]
for r, rec in enumerate(records):
    print(f"run {r}: P(+,+) = {rec.n_pp / rec.total:.4f}")
pooled = pool_records(records)
print(f"pooled: P(+,+) = {pooled.n_pp / pooled.total:.4f} (mixture value 0.625)")
