"""Dense two-phase simplex over ``fractions.Fraction`` with Bland's rule.

Solves ``min c.x  s.t.  A x = b,  x >= 0`` exactly. Phase 1 either finds a
basic feasible solution or returns a Farkas vector ``y`` with ``A^T y <= 0``
and ``b.y > 0``. The tableau survives between objectives, so a caller can
re-optimize a sequence of objectives over a shrinking optimal face (used for
lexicographic tie-breaking).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class Infeasible(Exception):
    def __init__(self, farkas: list[Fraction], residual: Fraction):
        super().__init__(f"system infeasible (phase-1 residual {residual})")
        self.farkas = farkas
        self.residual = residual


class Unbounded(Exception):
    pass


class RationalSimplex:
    """Exact simplex tableau for the standard-form system ``A x = b, x >= 0``.

    Construction runs phase 1 and raises :class:`Infeasible` when the
    system has no nonnegative solution.
    """

    def __init__(self, A: Sequence[Sequence], b: Sequence):
        m = len(A)
        self.n = len(A[0]) if m else 0
        n = self.n
        self.rows: list[list[Fraction]] = []
        self.rhs: list[Fraction] = []
        flip = []
        for i in range(m):
            row = [Fraction(x) for x in A[i]]
            bi = Fraction(b[i])
            if len(row) != n:
                raise ValueError("ragged constraint matrix")
            s = -1 if bi < 0 else 1
            flip.append(s)
            if s < 0:
                row = [-x for x in row]
                bi = -bi
            # artificial columns n .. n+m-1
            row.extend(ONE if k == i else ZERO for k in range(m))
            self.rows.append(row)
            self.rhs.append(bi)
        self.m = m
        self.basis = [n + i for i in range(m)]
        self.fixed: set[int] = set()
        self.pivots = 0

        # phase 1: minimize the sum of artificials
        cost = [ZERO] * n + [ONE] * m
        self._set_objective(cost)
        self._run(allowed=range(n + m))
        residual = -self.z
        if residual > 0:
            # duals of the phase-1 optimum; artificial columns hold B^-1
            y = [ZERO] * m
            for k in range(m):
                col = n + k
                y[k] = cost[col] - self.d[col]
            raise Infeasible([yk * s for yk, s in zip(y, flip)], residual)
        self._drop_artificials()

    # -- tableau mechanics ---------------------------------------------------

    def _set_objective(self, cost: Sequence[Fraction]):
        width = len(self.rows[0]) if self.rows else len(cost)
        cost = list(cost) + [ZERO] * (width - len(cost))
        d = list(cost)
        z = ZERO
        for i, bv in enumerate(self.basis):
            cb = cost[bv]
            if cb:
                row = self.rows[i]
                for j, x in enumerate(row):
                    if x:
                        d[j] -= cb * x
                z -= cb * self.rhs[i]
        self.d = d
        self.z = z  # negated objective value, kept in tableau convention

    def _pivot(self, r: int, c: int):
        row = self.rows[r]
        piv = row[c]
        if piv != 1:
            inv = 1 / piv
            row[:] = [x * inv for x in row]
            self.rhs[r] *= inv
        nz = [(j, x) for j, x in enumerate(row) if x]
        br = self.rhs[r]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other[c]
            if f:
                for j, x in nz:
                    other[j] -= f * x
                self.rhs[i] -= f * br
        f = self.d[c]
        if f:
            for j, x in nz:
                self.d[j] -= f * x
            self.z -= f * br
        self.basis[r] = c
        self.pivots += 1

    def _run(self, allowed):
        allowed = sorted(set(allowed) - self.fixed)
        while True:
            # Bland: lowest-index improving column, lowest-index leaving variable
            enter = next((j for j in allowed if self.d[j] < 0), None)
            if enter is None:
                return
            best = None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                raise Unbounded(f"objective unbounded along column {enter}")
            self._pivot(best[1], enter)

    def _drop_artificials(self):
        n = self.n
        keep_rows = []
        for i, bv in enumerate(self.basis):
            if bv >= n:
                col = next((j for j in range(n) if self.rows[i][j]), None)
                if col is None:
                    continue  # redundant equality
                self._pivot(i, col)
            keep_rows.append(i)
        self.rows = [self.rows[i][:n] for i in keep_rows]
        self.rhs = [self.rhs[i] for i in keep_rows]
        self.basis = [self.basis[i] for i in keep_rows]
        self.m = len(self.rows)

    # -- public API ------------------------------------------------------------

    def minimize(self, cost: Sequence) -> Fraction:
        """Optimize ``cost`` over the current face; returns the optimal value."""
        self._set_objective([Fraction(x) for x in cost])
        self._run(range(self.n))
        return -self.z

    def restrict_to_optimal_face(self):
        """Pin at zero every column with positive reduced cost.

        With the current optimal dual, complementary slackness makes the
        remaining system exactly the set of optimal solutions.
        """
        for j in range(self.n):
            if self.d[j] > 0:
                self.fixed.add(j)

    def solution(self) -> list[Fraction]:
        x = [ZERO] * self.n
        for i, bv in enumerate(self.basis):
            x[bv] = self.rhs[i]
        return x


def solve(c: Sequence, A: Sequence[Sequence], b: Sequence) -> tuple[Fraction, list[Fraction]]:
    """Exact ``min c.x  s.t.  A x = b, x >= 0``; raises Infeasible/Unbounded."""
    lp = RationalSimplex(A, b)
    value = lp.minimize(c)
    return value, lp.solution()
