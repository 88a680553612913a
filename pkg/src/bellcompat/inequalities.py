"""Bell-type inequality evaluation and the two-step averages.

Every report is oriented so that ``violated`` is equivalent to
``margin = lhs - rhs > tol``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

TAU_INEQ = 1e-12


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    tol: float = TAU_INEQ
    note: str = ""

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def violated(self) -> bool:
        return self.lhs > self.rhs + self.tol

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "margin": float(self.margin),
            "violated": self.violated,
            "tolerance": self.tol,
            "note": self.note,
        }


def _check_range(name: str, values, lo: float, hi: float, slack: float):
    for v in values:
        if not (lo - slack <= v <= hi + slack):
            raise ValueError(f"{name}: input {v} outside [{lo}, {hi}]")


def bell_covariance(e_ab, e_cb, e_ac, tol: float = TAU_INEQ) -> InequalityReport:
    """``|<a,b> - <c,b>| <= 1 - <a,c>`` for ±1 variables on one probability space."""
    _check_range("bell_covariance", (e_ab, e_cb, e_ac), -1, 1, tol)
    return InequalityReport("bell_covariance", abs(e_ab - e_cb), 1 - e_ac, tol)


def wigner(p_ab_pp, p_bc_mp, p_ac_pp, tol: float = TAU_INEQ) -> InequalityReport:
    """``P(a=+,b=+) + P(b=-,c=+) >= P(a=+,c=+)``.

    Stored flipped (``lhs = P(a=+,c=+)``, ``rhs`` = the two-term sum) so that a
    positive margin means violation, as for the other reports.
    """
    _check_range("wigner", (p_ab_pp, p_bc_mp, p_ac_pp), 0, 1, tol)
    return InequalityReport(
        "wigner", p_ac_pp, p_ab_pp + p_bc_mp, tol,
        note="lhs = P(a=+1,c=+1); rhs = P(a=+1,b=+1) + P(b=-1,c=+1)",
    )


CHSH_TERMS = ("e_ab", "e_ab'", "e_a'b", "e_a'b'")


def chsh(e_ab, e_ab2, e_a2b, e_a2b2, tol: float = TAU_INEQ) -> InequalityReport:
    """``|e_ab + e_ab' + e_a'b + e_a'b' - 2 e_k| <= 2``, maximized over ``k``.

    Each choice of the negated term is a CHSH bound on its own; reporting the
    largest keeps the check independent of how the four settings are labelled.
    ``note`` names the negated term.
    """
    e = (e_ab, e_ab2, e_a2b, e_a2b2)
    _check_range("chsh", e, -1, 1, tol)
    total = sum(e)
    values = [abs(total - 2 * x) for x in e]
    k = max(range(4), key=lambda i: (values[i], i == 3))
    return InequalityReport("chsh", values[k], 2, tol, note=f"negated term {CHSH_TERMS[k]}")


# --- two-step averaging -------------------------------------------------------

OutcomeFn = Callable[..., np.ndarray]


@dataclass(frozen=True)
class LeggetModel:
    """Finite polarization grids ``u``, ``v`` and hidden grid ``lam``.

    ``F[iu, iv]`` weights the polarization pairs and ``rho[iu, iv, il]`` is a
    density over ``lam`` for each pair. ``A`` and ``B`` map
    ``(a, b, u, v, lam)`` (broadcast arrays) to ±1. ``domain`` masks the
    ``(u, v)`` cells the model is defined on; cells outside it must carry no
    ``F`` weight.
    """

    U: np.ndarray
    V: np.ndarray
    lam: np.ndarray
    F: np.ndarray
    rho: np.ndarray
    A: OutcomeFn
    B: OutcomeFn
    a: float
    b: float
    domain: np.ndarray | None = field(default=None)

    def __post_init__(self):
        for name in ("U", "V", "lam", "F", "rho"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        nu, nv, nl = len(self.U), len(self.V), len(self.lam)
        if self.F.shape != (nu, nv) or self.rho.shape != (nu, nv, nl):
            raise ValueError(f"F must be {(nu, nv)} and rho {(nu, nv, nl)}")
        dom = np.ones((nu, nv), bool) if self.domain is None else np.asarray(self.domain, bool)
        object.__setattr__(self, "domain", dom)
        if np.any(self.F < 0) or abs(self.F.sum() - 1) > 1e-12:
            raise ValueError("F must be nonnegative and sum to 1")
        if np.any(self.F[~dom] != 0):
            raise ValueError("F puts weight on (u, v) cells outside the model domain")
        if np.any(self.rho < 0) or np.any(np.abs(self.rho.sum(axis=2)[dom] - 1) > 1e-12):
            raise ValueError("each rho[u, v] on the domain must be nonnegative and sum to 1")

    def grids(self):
        return np.meshgrid(self.U, self.V, self.lam, indexing="ij")

    def products(self) -> np.ndarray:
        """``A * B`` on the full ``(u, v, lam)`` grid, checked to be ±1."""
        u, v, lam = self.grids()
        ab = np.asarray(self.A(self.a, self.b, u, v, lam)) * np.asarray(self.B(self.a, self.b, u, v, lam))
        ab = np.broadcast_to(ab, u.shape)
        if not np.all(np.abs(ab) == 1):
            raise ValueError("outcome functions must take values in {+1, -1}")
        return ab


def conditional_average(model: LeggetModel) -> np.ndarray:
    """First step: the average of ``A B`` over ``lam`` under ``rho[u, v]``.

    Cells outside the domain are NaN.
    """
    ab = model.products()
    out = np.einsum("uvl,uvl->uv", ab, model.rho)
    return np.where(model.domain, out, np.nan)


def legget_two_step(model: LeggetModel) -> float:
    """Average over ``lam`` given ``(u, v)``, then over ``(u, v)`` with ``F``."""
    inner = conditional_average(model)
    return float(np.sum(np.where(model.domain, inner * model.F, 0.0)))


def _check_joint(P: np.ndarray) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.ndim != 3:
        raise ValueError(f"P must be a 3-d (u, v, lam) table, got shape {P.shape}")
    if np.any(P < 0) or abs(P.sum() - 1) > 1e-12:
        raise ValueError("P must be nonnegative and sum to 1")
    return P


def legget_joint_average(P, A: OutcomeFn, B: OutcomeFn, a, b, U, V, lam) -> float:
    """``E(AB)`` as one sum against the joint weight ``P(u, v, lam)``."""
    P = _check_joint(P)
    uu, vv, ll = np.meshgrid(np.asarray(U, float), np.asarray(V, float), np.asarray(lam, float), indexing="ij")
    if P.shape != uu.shape:
        raise ValueError(f"P has shape {P.shape}, grids give {uu.shape}")
    ab = np.broadcast_to(np.asarray(A(a, b, uu, vv, ll)) * np.asarray(B(a, b, uu, vv, ll)), P.shape)
    return float(np.sum(ab * P))


def model_from_joint(P, A: OutcomeFn, B: OutcomeFn, a, b, U, V, lam, strict: bool = False) -> LeggetModel:
    """Split ``P(u, v, lam)`` into the marginal ``F(u, v)`` and conditionals ``rho``.

    ``(u, v)`` cells with zero mass have no conditional density; they are
    left out of the model domain, or rejected when ``strict`` is set.
    """
    P = _check_joint(P)
    F = P.sum(axis=2)
    domain = F > 0
    if strict and not domain.all():
        iu, iv = np.argwhere(~domain)[0]
        raise ValueError(f"cannot condition on zero-mass cell (u={U[iu]}, v={V[iv]}) at index ({iu}, {iv})")
    rho = np.zeros_like(P)
    rho[domain] = P[domain] / F[domain][:, None]
    return LeggetModel(U, V, lam, F, rho, A, B, a, b, domain)
