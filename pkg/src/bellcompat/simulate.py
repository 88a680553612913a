"""Monte Carlo event streams for context-indexed hidden-variable models.

Randomness is keyed, never sequential: the draws for trials in block ``k``
of role ``r`` come from a Philox generator seeded with ``(seed, r, k)``.
A stream is therefore a pure function of ``(spec, n, seed)`` however the
blocks are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import CoincidenceRecord, Outcome, PairwiseTable

BLOCK = 1 << 16

# stream roles; each keys an independent family of generators
ROLE_TABLE = 0
ROLE_SYSTEM = 1
ROLE_INSTRUMENT = (2, 3)
ROLE_DETECT = (4, 5)
ROLE_NOISE = (6, 7)

OutcomeRule = Callable[[float, np.ndarray, np.ndarray], np.ndarray]
DetectionHook = Callable[[float, np.ndarray, np.ndarray], np.ndarray]


def block_rng(seed: int, role: int, block: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, role, block])))


# --- densities ------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteDensity:
    values: tuple
    probs: tuple

    def __init__(self, values: Sequence, probs: Sequence):
        values, probs = tuple(values), tuple(float(p) for p in probs)
        if len(values) != len(probs) or not values:
            raise ValueError("values and probs must be nonempty and of equal length")
        if any(p < 0 for p in probs) or abs(sum(probs) - 1) > 1e-9:
            raise ValueError(f"probabilities must be nonnegative and sum to 1, got {probs}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point(cls, value) -> "DiscreteDensity":
        return cls([value], [1.0])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        cdf = np.cumsum(self.probs)
        idx = np.searchsorted(cdf, rng.random(size) * cdf[-1], side="right")
        return np.asarray(self.values)[np.minimum(idx, len(self.values) - 1)]


@dataclass(frozen=True)
class UniformDensity:
    low: float
    high: float

    def __post_init__(self):
        if not self.high > self.low:
            raise ValueError(f"empty interval [{self.low}, {self.high})")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.low, self.high, size)


@dataclass(frozen=True)
class ZeroDensity:
    def sample(self, rng, size):
        return np.zeros(size)


# --- outcome rules ---------------------------------------------------------------

def sign_cos2(theta, lam, lam_theta=None):
    """``sign(cos 2(lam - theta))``, with zero mapped to +1."""
    return np.where(np.cos(2.0 * (np.asarray(lam) - theta)) >= 0, 1, -1).astype(np.int8)


def shared_sign(theta, lam, lam_theta=None):
    """Both stations report the sign of the shared hidden value."""
    return np.where(np.asarray(lam) >= 0, 1, -1).astype(np.int8)


# --- specs -----------------------------------------------------------------------

@dataclass(frozen=True)
class ContextSpec:
    """One experimental context: settings, hidden densities, and a local rule.

    ``outcome_rule(theta, lam, lam_theta)`` is applied per station with that
    station's own setting and instrument variable only, and returns ±1 or
    ``Outcome.NO_CLICK``. The optional ``detection`` hook returns per-trial
    click probabilities from the same local arguments.
    """

    settings: tuple[float, float]
    system: object
    outcome_rule: OutcomeRule
    instruments: tuple = (None, None)
    detection: DetectionHook | None = None

    def __post_init__(self):
        if len(self.settings) != 2:
            raise ValueError("a context has exactly two settings")
        if len(self.instruments) != 2:
            raise ValueError("instrument densities come as a pair (None for absent)")
        if not hasattr(self.system, "sample"):
            raise TypeError("system density must provide sample(rng, size)")


@dataclass(frozen=True)
class ThresholdDetectionSpec:
    """Wave-like pulses with a sub-quantum random part cut off at the detector.

    Energies are in units of ``h nu``. Each arm registers
    ``pulse_energy * modulation(theta, lam) + xi`` with ``|xi| < 1`` and
    clicks iff that reaches ``threshold``; a click reports
    ``polarization_rule(theta, lam)``.
    """

    pulse_energy: float
    noise_law: object
    threshold: float
    window_rule: str = "trial"
    polarization_rule: Callable = sign_cos2
    modulation: Callable | None = None
    source: object = field(default_factory=lambda: UniformDensity(0.0, math.pi))

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if self.pulse_energy < 0:
            raise ValueError(f"pulse energy must be nonnegative, got {self.pulse_energy}")
        if self.window_rule != "trial":
            raise ValueError(f"unsupported window rule {self.window_rule!r}; only 'trial' pairing is modelled")


@dataclass(frozen=True)
class RunDriftSpec:
    """``runs`` repetitions of ``base`` with the hidden density perturbed per run.

    ``perturbation(run_index, base_density)`` returns that run's density.
    """

    base: ContextSpec
    runs: int
    perturbation: Callable[[int, object], object] = lambda r, d: d

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("at least one run is required")


def alternating_drift(first, second) -> Callable[[int, object], object]:
    """Even runs use ``first``, odd runs ``second``."""
    return lambda r, _base: first if r % 2 == 0 else second


# --- event streams ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EventStream:
    settings: tuple[float, float]
    trials: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        for name in ("trials", "a", "b"):
            arr = np.array(getattr(self, name), copy=True)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not (len(self.trials) == len(self.a) == len(self.b)):
            raise ValueError("stream columns differ in length")
        if len(self.trials) > 1 and np.any(np.diff(self.trials) <= 0):
            raise ValueError("trial indices must be strictly increasing")

    def __len__(self):
        return len(self.trials)

    def identical(self, other: "EventStream") -> bool:
        return (
            self.settings == other.settings
            and np.array_equal(self.trials, other.trials)
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
        )

    def events(self):
        for t, x, y in zip(self.trials, self.a, self.b):
            yield int(t), Outcome(int(x)), Outcome(int(y))


def _blocks(n: int):
    return [(k, k * BLOCK, min(n, (k + 1) * BLOCK)) for k in range((n + BLOCK - 1) // BLOCK)]


def _run_blocks(n: int, kernel, workers: int):
    if n < 1:
        raise ValueError(f"need at least one trial, got {n}")
    blocks = _blocks(n)
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda blk: kernel(*blk), blocks))
    else:
        parts = [kernel(*blk) for blk in blocks]
    a = np.concatenate([p[0] for p in parts]).astype(np.int8)
    b = np.concatenate([p[1] for p in parts]).astype(np.int8)
    return np.arange(n, dtype=np.int64), a, b


_CELL_A = np.array([1, 1, -1, -1], dtype=np.int8)
_CELL_B = np.array([1, -1, 1, -1], dtype=np.int8)


def sample_from_table(
    table: PairwiseTable, n: int, seed: int, settings=(0.0, 0.0), workers: int = 1
) -> EventStream:
    """I.i.d. outcome pairs drawn from one pairwise table."""
    bad = table.violations()
    if bad:
        raise ValueError("; ".join(bad))
    cdf = np.cumsum([float(x) for x in table.p])

    def kernel(k, lo, hi):
        u = block_rng(seed, ROLE_TABLE, k).random(hi - lo) * cdf[-1]
        cell = np.minimum(np.searchsorted(cdf, u, side="right"), 3)
        return _CELL_A[cell], _CELL_B[cell]

    trials, a, b = _run_blocks(n, kernel, workers)
    return EventStream(tuple(settings), trials, a, b)


def _station(spec: ContextSpec, side: int, k: int, seed: int, lam: np.ndarray) -> np.ndarray:
    size = len(lam)
    theta = spec.settings[side]
    dens = spec.instruments[side]
    lam_theta = dens.sample(block_rng(seed, ROLE_INSTRUMENT[side], k), size) if dens is not None else np.zeros(size)
    out = np.broadcast_to(np.asarray(spec.outcome_rule(theta, lam, lam_theta), dtype=np.int8), (size,)).copy()
    if not np.all(np.isin(out, (-1, 0, 1))):
        raise ValueError("outcome rule returned values outside {+1, -1, NO_CLICK}")
    if spec.detection is not None:
        p = np.broadcast_to(np.asarray(spec.detection(theta, lam, lam_theta), dtype=float), (size,))
        if np.any((p < 0) | (p > 1)):
            raise ValueError("detection hook returned probabilities outside [0, 1]")
        miss = block_rng(seed, ROLE_DETECT[side], k).random(size) >= p
        out[miss] = Outcome.NO_CLICK
    return out


def sample_context(spec: ContextSpec, n: int, seed: int, workers: int = 1) -> EventStream:
    """Draw hidden, then instrument variables; apply each station's local rule."""

    def kernel(k, lo, hi):
        lam = spec.system.sample(block_rng(seed, ROLE_SYSTEM, k), hi - lo)
        return _station(spec, 0, k, seed, lam), _station(spec, 1, k, seed, lam)

    trials, a, b = _run_blocks(n, kernel, workers)
    return EventStream(tuple(spec.settings), trials, a, b)


def sample_threshold(
    spec: ThresholdDetectionSpec, settings: tuple[float, float], n: int, seed: int, workers: int = 1
) -> EventStream:
    """Per arm: registered energy ``E_n*modulation + xi``; below threshold is NO_CLICK."""

    def arm(side, k, lam):
        theta = settings[side]
        xi = np.asarray(spec.noise_law.sample(block_rng(seed, ROLE_NOISE[side], k), len(lam)), dtype=float)
        if np.any(np.abs(xi) >= 1):
            raise ValueError("noise law produced |xi| >= 1 (one quantum)")
        base = spec.pulse_energy
        if spec.modulation is not None:
            base = base * np.asarray(spec.modulation(theta, lam), dtype=float)
        click = base + xi >= spec.threshold
        pol = np.broadcast_to(np.asarray(spec.polarization_rule(theta, lam), dtype=np.int8), lam.shape)
        return np.where(click, pol, np.int8(Outcome.NO_CLICK))

    def kernel(k, lo, hi):
        lam = spec.source.sample(block_rng(seed, ROLE_SYSTEM, k), hi - lo)
        return arm(0, k, lam), arm(1, k, lam)

    trials, a, b = _run_blocks(n, kernel, workers)
    return EventStream(tuple(settings), trials, a, b)


def run_seed(seed: int, run: int) -> int:
    return seed + run


def run_with_drift(spec: RunDriftSpec, n_per_run: int, seed: int, workers: int = 1) -> list[EventStream]:
    """One stream per run; run ``r`` samples its perturbed density with seed ``seed + r``."""
    streams = []
    for r in range(spec.runs):
        density = spec.perturbation(r, spec.base.system)
        if not hasattr(density, "sample"):
            raise TypeError(f"run {r}: perturbation did not return a density")
        ctx = ContextSpec(spec.base.settings, density, spec.base.outcome_rule, spec.base.instruments, spec.base.detection)
        streams.append(sample_context(ctx, n_per_run, run_seed(seed, r), workers))
    return streams


def post_select(stream: EventStream) -> tuple[CoincidenceRecord, int]:
    """Keep trials where both stations clicked; tally the four cells."""
    a = stream.a.astype(np.int16)
    b = stream.b.astype(np.int16)
    both = (a != 0) & (b != 0)
    a, b = a[both], b[both]
    counts = [int(np.count_nonzero((a == x) & (b == y))) for x, y in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
    record = CoincidenceRecord(stream.settings[0], stream.settings[1], *counts)
    return record, int(len(stream) - both.sum())


def pool_records(records: Sequence[CoincidenceRecord]) -> CoincidenceRecord:
    """Sum counts across runs of the same context."""
    first = records[0]
    totals = [sum(r.counts[i] for r in records) for i in range(4)]
    return CoincidenceRecord(first.theta1, first.theta2, *totals)
