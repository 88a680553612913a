"""Joint-distribution existence for pairwise marginals, and quasi-probabilities.

The unknowns are the ``2**n`` atom weights of a joint distribution. Every
cell of every pairwise table contributes one equality row; a final row asks
the weights to sum to one. Compatibility is feasibility of that system with
nonnegative weights. The quasi-probability problem drops nonnegativity and
minimizes the total negative mass instead.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import linprog

from .core import (
    CELLS,
    MAX_VARIABLES,
    TAU_NORM,
    FamilyError,
    MarginalFamily,
    SignedJoint,
    validate_family,
)
from .simplex import Infeasible, RationalSimplex

EXACT_LIMIT = 12
RATIONALIZE_DENOMINATOR = 10**9

Mode = Literal["auto", "exact", "float"]


class Status(str, enum.Enum):
    FEASIBLE = "FEASIBLE"
    INFEASIBLE = "INFEASIBLE"


@dataclass(frozen=True)
class CompatibilityVerdict:
    status: Status
    witness: SignedJoint | None = None
    certificate: tuple | None = None
    mode: str = "exact"
    residual: float | Fraction = 0

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE


@dataclass(frozen=True)
class QuasiSolution:
    joint: SignedJoint
    negativity: float | Fraction
    mode: str = "exact"


def constraint_system(family: MarginalFamily) -> tuple[list[list[int]], list, list[str]]:
    """Rows of ``A w = b`` over atom weights, with a human-readable row label each."""
    n = family.n
    atoms = range(1 << n)
    A: list[list[int]] = []
    b: list = []
    labels: list[str] = []
    for t in family.tables:
        i, j = t.indices
        for (alpha, beta), p in zip(CELLS, t.p):
            A.append([
                int(((a >> i) & 1) == (alpha > 0) and ((a >> j) & 1) == (beta > 0)) for a in atoms
            ])
            b.append(p)
            labels.append(f"P(a{i}={alpha:+d}, a{j}={beta:+d})")
    A.append([1] * (1 << n))
    b.append(Fraction(1) if family.exact else 1.0)
    labels.append("normalization")
    return A, b, labels


def _check_input(family: MarginalFamily, cap: int):
    if family.n > cap:
        raise FamilyError(f"n = {family.n} exceeds the variable cap {cap}")
    report = validate_family(family)
    if report:
        raise FamilyError("invalid family: " + "; ".join(report))


def _resolve_mode(family: MarginalFamily, mode: Mode) -> tuple[str, MarginalFamily]:
    if mode == "float":
        return "float", family.as_float()
    if mode == "auto":
        if family.exact and family.n <= EXACT_LIMIT:
            return "exact", family
        return "float", family.as_float()
    if mode == "exact":
        if family.exact:
            return "exact", family
        snapped = family.as_fraction(RATIONALIZE_DENOMINATOR)
        report = validate_family(snapped)
        if report:
            raise FamilyError(
                "float family does not rationalize to an exactly valid family "
                "(use float mode): " + "; ".join(report)
            )
        return "exact", snapped
    raise ValueError(f"unknown mode {mode!r}")


def product_witness(family: MarginalFamily) -> SignedJoint | None:
    """Product of single-variable marginals, if it reproduces every table.

    Variables not covered by any table are set to +1.
    """
    n = family.n
    exact = family.exact
    one = Fraction(1) if exact else 1.0
    plus = [None] * n
    for t in family.tables:
        for pos, k in enumerate(t.indices):
            if plus[k] is None:
                plus[k] = t.marginal(pos)[0]
    plus = [one if p is None else p for p in plus]
    for t in family.tables:
        i, j = t.indices
        for (alpha, beta), cell in zip(CELLS, t.p):
            pi = plus[i] if alpha > 0 else one - plus[i]
            pj = plus[j] if beta > 0 else one - plus[j]
            if (pi * pj != cell) if exact else abs(pi * pj - cell) > TAU_NORM:
                return None
    w = []
    for a in range(1 << n):
        x = one
        for k in range(n):
            x *= plus[k] if (a >> k) & 1 else one - plus[k]
        w.append(x)
    return SignedJoint(n, w)


def _empty_verdict(family: MarginalFamily, mode: str) -> CompatibilityVerdict:
    return CompatibilityVerdict(Status.FEASIBLE, SignedJoint.point_mass([1] * family.n), mode=mode)


def verify_certificate(family: MarginalFamily, y: Sequence) -> float | Fraction:
    """Return ``b.y`` if ``y`` is a valid Farkas certificate for ``family``.

    A valid ``y`` has ``A^T y <= 0``; then ``b.y > 0`` means no nonnegative
    joint exists, and every nonnegative ``w`` satisfies
    ``||A w - b||_1 >= b.y / max|y|``. Raises ``ValueError`` when the dual
    conditions fail.
    """
    A, b, _ = constraint_system(family)
    if len(y) != len(b):
        raise ValueError(f"certificate has {len(y)} entries for {len(b)} constraints")
    exact = all(isinstance(v, Fraction) for v in y) and family.exact
    for col in range(1 << family.n):
        s = sum(A[r][col] * y[r] for r in range(len(b)))
        if (s > 0) if exact else (float(s) > TAU_NORM):
            raise ValueError(f"certificate fails on atom {col}: A^T y = {s} > 0")
    bound = sum(bi * yi for bi, yi in zip(b, y))
    if bound <= 0:
        raise ValueError(f"certificate has b.y = {bound} <= 0")
    return bound


def check_compatibility(
    family: MarginalFamily, mode: Mode = "auto", cap: int = MAX_VARIABLES, tol: float = TAU_NORM
) -> CompatibilityVerdict:
    """Decide whether a nonnegative joint reproduces every table of ``family``.

    ``mode="exact"`` runs the rational simplex (float cells are snapped to
    nearby rationals first); ``"float"`` solves an L1 residual LP and calls the
    family feasible when the residual is within ``tol``. ``"auto"`` is exact
    for rational families with at most 12 variables.
    """
    _check_input(family, cap)
    mode, family = _resolve_mode(family, mode)
    if not family.tables:
        return _empty_verdict(family, mode)
    if family.n <= EXACT_LIMIT:
        independent = product_witness(family)
        if independent is not None:
            return CompatibilityVerdict(Status.FEASIBLE, independent, mode=mode)
    A, b, _ = constraint_system(family)
    if mode == "exact":
        try:
            lp = RationalSimplex(A, b)
        except Infeasible as exc:
            return CompatibilityVerdict(
                Status.INFEASIBLE, certificate=tuple(exc.farkas), mode=mode, residual=exc.residual
            )
        return CompatibilityVerdict(Status.FEASIBLE, SignedJoint(family.n, lp.solution()), mode=mode)
    return _float_compatibility(family, A, b, tol)


def _float_compatibility(family, A, b, tol) -> CompatibilityVerdict:
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, k = A.shape
    # min sum(s+ + s-)  s.t.  A w + s+ - s- = b,  w, s+, s- >= 0
    A_eq = np.hstack([A, np.eye(m), -np.eye(m)])
    c = np.concatenate([np.zeros(k), np.ones(2 * m)])
    res = linprog(c, A_eq=A_eq, b_eq=b, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    residual = max(float(res.fun), 0.0)
    if residual <= tol:
        w = np.clip(res.x[:k], 0.0, None)
        return CompatibilityVerdict(
            Status.FEASIBLE, SignedJoint(family.n, w.tolist()), mode="float", residual=residual
        )
    y = np.asarray(res.eqlin.marginals, dtype=float)
    return CompatibilityVerdict(Status.INFEASIBLE, certificate=tuple(y.tolist()), mode="float", residual=residual)


def solve_quasi(family: MarginalFamily, mode: Mode = "auto", cap: int = MAX_VARIABLES) -> QuasiSolution:
    """Signed joint of least negative mass reproducing every table.

    Weights are split as ``w = w+ - w-`` and ``sum(w-)`` is minimized. In
    exact mode ties are broken toward the lexicographically smallest weight
    vector in atom order.
    """
    _check_input(family, cap)
    mode, family = _resolve_mode(family, mode)
    n = family.n
    if not family.tables:
        joint = _empty_verdict(family, mode).witness
        return QuasiSolution(joint, Fraction(0), mode)
    A, b, _ = constraint_system(family)
    k = 1 << n
    if mode == "exact":
        split = [row + [-x for x in row] for row in A]
        try:
            lp = RationalSimplex(split, b)
        except Infeasible as exc:
            raise FamilyError("tables admit no signed joint (inconsistent marginals)") from exc
        negativity = lp.minimize([0] * k + [1] * k)
        for atom in range(k):
            lp.restrict_to_optimal_face()
            cost = [0] * (2 * k)
            cost[atom], cost[k + atom] = 1, -1
            lp.minimize(cost)
        x = lp.solution()
        w = [x[a] - x[k + a] for a in range(k)]
        return QuasiSolution(SignedJoint(n, w), negativity, mode)

    A = np.asarray(A, dtype=float)
    A_eq = np.hstack([A, -A])
    c = np.concatenate([np.zeros(k), np.ones(k)])
    res = linprog(c, A_eq=A_eq, b_eq=np.asarray(b, dtype=float), bounds=(0, None), method="highs")
    if res.status == 2:
        raise FamilyError("tables admit no signed joint (inconsistent marginals)")
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    w = res.x[:k] - res.x[k:]
    return QuasiSolution(SignedJoint(n, w.tolist()), float(res.fun), mode)


# --- independent oracle -------------------------------------------------------

def _rank_and_solve(M: list[list[Fraction]], rhs: list[Fraction] | None = None):
    """Gauss-Jordan elimination; returns (rank, pivot columns, reduced rows, reduced rhs)."""
    rows = [list(r) for r in M]
    rhs = list(rhs) if rhs is not None else [Fraction(0)] * len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        rhs[r], rhs[p] = rhs[p], rhs[r]
        piv = rows[r][c]
        rows[r] = [x / piv for x in rows[r]]
        rhs[r] /= piv
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
                rhs[i] -= f * rhs[r]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return r, pivots, rows, rhs


def _solve_square(cols: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Solve ``[cols] x = rhs`` for a square system; None if singular."""
    size = len(rhs)
    M = [[cols[j][i] for j in range(size)] for i in range(size)]
    rank, _, rows, red = _rank_and_solve(M, rhs)
    if rank < size:
        return None
    return red[:size]


def brute_force_compatibility(family: MarginalFamily) -> CompatibilityVerdict:
    """Decide compatibility by enumerating basic solutions; for ``n <= 4``.

    The primal polytope ``{w >= 0 : A w = b}`` is nonempty iff one of its
    vertices is, so every nonsingular column basis is tried. When none gives a
    nonnegative point, the pointed dual polyhedron ``{y : A^T y <= 0, b.y = 1}``
    (over independent rows only) is searched the same way for a Farkas vertex.
    """
    if family.n > 4:
        raise FamilyError(f"brute force is limited to n <= 4, got n = {family.n}")
    _check_input(family, 4)
    _, family = _resolve_mode(family, "exact")
    n = family.n
    if not family.tables:
        return _empty_verdict(family, "exact")
    A, b, _ = constraint_system(family)
    A = [[Fraction(x) for x in row] for row in A]
    b = [Fraction(x) for x in b]
    k = 1 << n

    rank, pivot_rows, _, _ = _rank_and_solve([list(col) for col in zip(*A)])
    # pivot_rows are the indices of a maximal independent set of rows of A
    Ar = [A[i] for i in pivot_rows]
    br = [b[i] for i in pivot_rows]
    columns = [[Ar[i][j] for i in range(rank)] for j in range(k)]

    for basis in _candidate_bases(columns, br, range(k), rank):
        x = _solve_square([columns[j] for j in basis], br)
        if x is None or any(v < 0 for v in x):
            continue
        w = [Fraction(0)] * k
        for j, v in zip(basis, x):
            w[j] = v
        if any(sum(A[r][j] * w[j] for j in range(k)) != b[r] for r in range(len(b))):
            # the dropped rows disagree with the kept ones
            _inconsistent()
        return CompatibilityVerdict(Status.FEASIBLE, SignedJoint(n, w), mode="exact")

    # dual search: rank-1 tight columns plus the normalization b.y = 1
    for tight in _candidate_duals(columns, br, k, rank):
        rows = [columns[j] for j in tight] + [br]
        rhs = [Fraction(0)] * (rank - 1) + [Fraction(1)]
        M = [[rows[i][c] for c in range(rank)] for i in range(rank)]
        r, _, _, sol = _rank_and_solve(M, rhs)
        if r < rank:
            continue
        y = sol[:rank]
        if all(sum(c * v for c, v in zip(columns[j], y)) <= 0 for j in range(k)):
            full = [Fraction(0)] * len(b)
            for i, v in zip(pivot_rows, y):
                full[i] = v
            return CompatibilityVerdict(Status.INFEASIBLE, certificate=tuple(full), mode="exact")
    _inconsistent()


_SCREEN = 1e-7


def _batched_solutions(mats: np.ndarray, rhs: np.ndarray):
    """Float solutions of a stack of square systems; singular ones dropped."""
    det = np.linalg.det(mats)
    ok = np.abs(det) > 1e-9
    sols = np.full(mats.shape[:2], np.nan)
    if ok.any():
        sols[ok] = np.linalg.solve(mats[ok], np.broadcast_to(rhs, (int(ok.sum()), len(rhs)))[..., None])[..., 0]
    return ok, sols


def _candidate_bases(columns, br, cols, rank):
    """Column bases whose float solution is (nearly) nonnegative, in enumeration order.

    A float screen only; every survivor is re-solved exactly by the caller.
    """
    combos = np.array(list(itertools.combinations(cols, rank)), dtype=int)
    C = np.array([[float(x) for x in col] for col in columns])  # (k, rank)
    mats = C[combos].transpose(0, 2, 1)
    ok, sols = _batched_solutions(mats, np.array([float(x) for x in br]))
    keep = ok & np.all(sols > -_SCREEN, axis=1)
    return [tuple(c) for c in combos[keep]]


def _candidate_duals(columns, br, k, rank):
    combos = np.array(list(itertools.combinations(range(k), rank - 1)), dtype=int)
    C = np.array([[float(x) for x in col] for col in columns])
    bf = np.array([float(x) for x in br])
    mats = np.concatenate([C[combos], np.broadcast_to(bf, (len(combos), 1, rank))], axis=1)
    rhs = np.zeros(rank)
    rhs[-1] = 1.0
    ok, sols = _batched_solutions(mats, rhs)
    slack = np.einsum("kr,cr->ck", C, np.nan_to_num(sols))
    keep = ok & np.all(slack < _SCREEN, axis=1)
    return [tuple(c) for c in combos[keep]]


def _inconsistent():
    raise FamilyError("equality system is inconsistent; no signed joint exists")
