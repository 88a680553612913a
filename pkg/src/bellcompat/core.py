"""Shared domain types: variables, outcomes, pairwise tables, families, joints.

Probability cells may be ``fractions.Fraction`` (rational mode, checked
exactly) or floats (checked to within ``TAU_NORM``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

TAU_NORM = 1e-9
MAX_VARIABLES = 20

#: Cell order used everywhere: (+,+), (+,-), (-,+), (-,-).
CELLS: tuple[tuple[int, int], ...] = ((1, 1), (1, -1), (-1, 1), (-1, -1))


class Outcome(enum.IntEnum):
    """Measurement outcome. ``NO_CLICK`` only appears in event streams."""

    MINUS = -1
    NO_CLICK = 0
    PLUS = 1


class FamilyError(ValueError):
    """Raised when a family or table violates its invariants."""


@dataclass(frozen=True)
class VariableId:
    index: int
    label: str | None = None

    def __post_init__(self):
        if self.index < 0:
            raise FamilyError(f"variable index must be nonnegative, got {self.index}")

    def __str__(self):
        return self.label if self.label else f"a{self.index}"


def _var(v: VariableId | int) -> VariableId:
    return v if isinstance(v, VariableId) else VariableId(int(v))


def is_exact(x) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


@dataclass(frozen=True)
class PairwiseTable:
    """Joint distribution of one pair of dichotomous variables.

    ``p`` holds the four cells in ``CELLS`` order. Construction does not
    validate; call :meth:`violations` or :func:`validate_family`.
    """

    pair: tuple[VariableId, VariableId]
    p: tuple

    def __init__(self, pair, p):
        i, j = pair
        object.__setattr__(self, "pair", (_var(i), _var(j)))
        cells = tuple(p)
        if len(cells) != 4:
            raise FamilyError(f"a pairwise table needs 4 cells, got {len(cells)}")
        object.__setattr__(self, "p", cells)

    @classmethod
    def from_mapping(cls, pair, cells: Mapping[tuple[int, int], object]) -> "PairwiseTable":
        return cls(pair, [cells[c] for c in CELLS])

    @property
    def indices(self) -> tuple[int, int]:
        return self.pair[0].index, self.pair[1].index

    @property
    def exact(self) -> bool:
        return all(is_exact(x) for x in self.p)

    def prob(self, alpha: int, beta: int):
        return self.p[CELLS.index((alpha, beta))]

    def marginal(self, position: int) -> tuple:
        """Single-variable marginal ``(P(+1), P(-1))`` of the pair member at ``position``."""
        pp, pm, mp, mm = self.p
        if position == 0:
            return pp + pm, mp + mm
        return pp + mp, pm + mm

    def swapped(self) -> "PairwiseTable":
        pp, pm, mp, mm = self.p
        return PairwiseTable((self.pair[1], self.pair[0]), (pp, mp, pm, mm))

    def oriented(self, i: int, j: int) -> "PairwiseTable":
        """The same table with ``pair`` ordered as ``(i, j)``."""
        if self.indices == (i, j):
            return self
        if self.indices == (j, i):
            return self.swapped()
        raise KeyError((i, j))

    def violations(self, tol: float = TAU_NORM) -> list[str]:
        out = []
        i, j = self.indices
        name = f"({i},{j})"
        if i == j:
            out.append(f"pair_distinct: table {name} pairs a variable with itself")
        exact = self.exact
        for cell, x in zip(CELLS, self.p):
            if not isinstance(x, (int, float, Fraction, np.floating, np.integer)) or (
                not exact and not math.isfinite(float(x))
            ):
                out.append(f"cell_numeric: table {name} cell {cell} is not a finite number")
                return out
            if x < 0:
                out.append(f"cell_nonnegative: table {name} cell {cell} = {x} < 0")
        total = sum(self.p)
        if exact:
            if total != 1:
                out.append(f"normalization: table {name} sums to {total}, not 1")
        elif abs(float(total) - 1.0) > tol:
            out.append(f"normalization: table {name} sums to {float(total)!r}, not 1")
        return out

    def as_float(self) -> "PairwiseTable":
        return PairwiseTable(self.pair, [float(x) for x in self.p])

    def as_fraction(self, max_denominator: int | None = None) -> "PairwiseTable":
        return PairwiseTable(self.pair, [to_fraction(x, max_denominator) for x in self.p])


def to_fraction(x, max_denominator: int | None = None) -> Fraction:
    if is_exact(x):
        return Fraction(x)
    f = Fraction(float(x))
    return f.limit_denominator(max_denominator) if max_denominator else f


def correlation_of(table: PairwiseTable) -> float | Fraction:
    """``p(+,+) - p(+,-) - p(-,+) + p(-,-)``; exact for rational tables."""
    bad = table.violations()
    if bad:
        raise FamilyError("; ".join(bad))
    pp, pm, mp, mm = table.p
    return pp - pm - mp + mm


@dataclass(frozen=True)
class MarginalFamily:
    """``n`` dichotomous variables and pairwise tables over some of their pairs."""

    n: int
    tables: tuple[PairwiseTable, ...] = ()
    labels: tuple[str | None, ...] = field(default=())

    def __init__(self, n: int, tables: Iterable[PairwiseTable] = (), labels: Sequence[str | None] = ()):
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "tables", tuple(tables))
        object.__setattr__(self, "labels", tuple(labels))

    @property
    def exact(self) -> bool:
        return all(t.exact for t in self.tables)

    def variables(self) -> list[VariableId]:
        labels = self.labels or (None,) * self.n
        return [VariableId(k, labels[k]) for k in range(self.n)]

    def table_for(self, i: int, j: int) -> PairwiseTable:
        for t in self.tables:
            if set(t.indices) == {i, j}:
                return t.oriented(i, j)
        raise KeyError(f"no table for pair ({i},{j})")

    def as_fraction(self, max_denominator: int | None = None) -> "MarginalFamily":
        return MarginalFamily(self.n, [t.as_fraction(max_denominator) for t in self.tables], self.labels)

    def as_float(self) -> "MarginalFamily":
        return MarginalFamily(self.n, [t.as_float() for t in self.tables], self.labels)


def validate_family(family: MarginalFamily, tol: float = TAU_NORM) -> list[str]:
    """Return every invariant violation in ``family``; empty means valid.

    Rational families are checked exactly, float families to within ``tol``.
    Each entry names the invariant and the offending pair(s).
    """
    report: list[str] = []
    if family.n < 0:
        return [f"variable_count: n = {family.n} is negative"]
    if family.labels and len(family.labels) != family.n:
        report.append(f"labels: {len(family.labels)} labels for {family.n} variables")
    seen: dict[frozenset, tuple[int, int]] = {}
    for t in family.tables:
        i, j = t.indices
        for k in (i, j):
            if k >= family.n:
                report.append(f"index_range: table ({i},{j}) uses variable {k} but n = {family.n}")
        key = frozenset((i, j))
        if key in seen and i != j:
            report.append(f"unique_pair: tables ({seen[key][0]},{seen[key][1]}) and ({i},{j}) cover the same pair")
        seen[key] = (i, j)
        report.extend(t.violations(tol))
    if report:
        return report

    exact = family.exact
    marginals: dict[int, list[tuple[tuple[int, int], tuple]]] = {}
    for t in family.tables:
        for pos, k in enumerate(t.indices):
            marginals.setdefault(k, []).append((t.indices, t.marginal(pos)))
    for k, entries in sorted(marginals.items()):
        ref_pair, ref = entries[0]
        for pair, m in entries[1:]:
            if exact:
                differs = m[0] != ref[0]
            else:
                differs = abs(float(m[0]) - float(ref[0])) > tol
            if differs:
                report.append(
                    f"marginal_consistency: variable {k} has P(+1) = {ref[0]} from pair "
                    f"{ref_pair} but {m[0]} from pair {pair}"
                )
    return report


# --- atom encoding ----------------------------------------------------------

def encode_atom(signs: Sequence[int]) -> int:
    """Atom index of a sign vector: bit k set iff variable k is +1."""
    idx = 0
    for k, s in enumerate(signs):
        if s == 1:
            idx |= 1 << k
        elif s != -1:
            raise ValueError(f"sign vector entries must be +1 or -1, got {s}")
    return idx


def decode_atom(index: int, n: int) -> tuple[int, ...]:
    if not 0 <= index < (1 << n):
        raise ValueError(f"atom index {index} out of range for n = {n}")
    return tuple(1 if (index >> k) & 1 else -1 for k in range(n))


def atom_signs(n: int) -> np.ndarray:
    """``(2**n, n)`` array of ±1; row ``a`` is ``decode_atom(a, n)``."""
    idx = np.arange(1 << n)[:, None]
    return np.where((idx >> np.arange(n)) & 1, 1, -1).astype(np.int8)


@dataclass(frozen=True)
class SignedJoint:
    """Real-weighted measure on the ``2**n`` atoms, indexed by :func:`encode_atom`."""

    n: int
    w: tuple

    def __init__(self, n: int, w: Sequence):
        object.__setattr__(self, "n", int(n))
        w = tuple(w)
        if len(w) != 1 << self.n:
            raise ValueError(f"expected {1 << self.n} weights, got {len(w)}")
        object.__setattr__(self, "w", w)

    @classmethod
    def from_mapping(cls, n: int, weights: Mapping[tuple[int, ...], object]) -> "SignedJoint":
        w = [0] * (1 << n)
        for signs, x in weights.items():
            w[encode_atom(signs)] = x
        return cls(n, w)

    @classmethod
    def point_mass(cls, signs: Sequence[int]) -> "SignedJoint":
        n = len(signs)
        w = [Fraction(0)] * (1 << n)
        w[encode_atom(signs)] = Fraction(1)
        return cls(n, w)

    def weight(self, signs: Sequence[int]):
        return self.w[encode_atom(signs)]

    @property
    def total(self):
        return sum(self.w)

    @property
    def nonnegative(self) -> bool:
        return all(x >= 0 for x in self.w)

    @property
    def negativity(self):
        return sum((-x for x in self.w if x < 0), 0 * self.w[0])

    def pair_table(self, i: int, j: int) -> PairwiseTable:
        cells = {c: 0 for c in CELLS}
        for a, x in enumerate(self.w):
            si = 1 if (a >> i) & 1 else -1
            sj = 1 if (a >> j) & 1 else -1
            cells[(si, sj)] = cells[(si, sj)] + x
        return PairwiseTable.from_mapping((i, j), cells)

    def marginal_family(self, pairs: Iterable[tuple[int, int]] | None = None) -> MarginalFamily:
        """Family of pair marginals; all unordered pairs by default."""
        if pairs is None:
            pairs = [(i, j) for i in range(self.n) for j in range(i + 1, self.n)]
        return MarginalFamily(self.n, [self.pair_table(i, j) for i, j in pairs])

    def correlation(self, i: int, j: int):
        return correlation_of(self.pair_table(i, j))

    def as_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.w])


def all_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def sign_vectors(n: int) -> Iterable[tuple[int, ...]]:
    """All sign vectors of length ``n`` in atom-index order."""
    for a in range(1 << n):
        yield decode_atom(a, n)



@dataclass(frozen=True)
class CoincidenceRecord:
    """Event counts for one pair of analyzer settings (angles in radians)."""

    theta1: float
    theta2: float
    n_pp: int
    n_pm: int
    n_mp: int
    n_mm: int

    def __post_init__(self):
        for name in ("n_pp", "n_pm", "n_mp", "n_mm"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {v!r}")

    @property
    def counts(self) -> tuple[int, int, int, int]:
        return self.n_pp, self.n_pm, self.n_mp, self.n_mm

    @property
    def total(self) -> int:
        return self.n_pp + self.n_pm + self.n_mp + self.n_mm

    @property
    def zero_total(self) -> bool:
        """No coincidences: frequencies are undefined for this record."""
        return self.total == 0

    @property
    def settings_deg(self) -> tuple[float, float]:
        return math.degrees(self.theta1), math.degrees(self.theta2)
