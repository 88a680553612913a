"""Quantum predictions for the polarization singlet experiment.

Convention: perfectly correlated outcomes at equal settings,
``P(+,+) = P(-,-) = cos^2(d)/2`` and ``P(+,-) = P(-,+) = sin^2(d)/2`` for
``d = theta1 - theta2``, so the correlation is ``cos 2d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import FamilyError, MarginalFamily, PairwiseTable, VariableId


@dataclass(frozen=True)
class AngleSet:
    """Three or four analyzer settings in radians, distinct modulo pi."""

    angles: tuple[float, ...]

    def __init__(self, angles: Sequence[float]):
        object.__setattr__(self, "angles", tuple(float(a) for a in angles))
        if len(self.angles) not in (3, 4):
            raise FamilyError(f"an angle set holds 3 or 4 settings, got {len(self.angles)}")
        for i in range(len(self.angles)):
            for j in range(i + 1, len(self.angles)):
                d = math.remainder(self.angles[i] - self.angles[j], math.pi)
                if abs(d) < 1e-12:
                    raise FamilyError(
                        f"settings {i} and {j} coincide modulo pi "
                        f"({math.degrees(self.angles[i])} and {math.degrees(self.angles[j])} deg)"
                    )

    @classmethod
    def from_degrees(cls, degrees: Sequence[float]) -> "AngleSet":
        return cls([math.radians(d) for d in degrees])


def singlet_pair_table(theta1: float, theta2: float, pair=(0, 1)) -> PairwiseTable:
    d = theta1 - theta2
    c = 0.5 * math.cos(d) ** 2
    s = 0.5 * math.sin(d) ** 2
    return PairwiseTable(pair, (c, s, s, c))


def singlet_correlation(theta1: float, theta2: float) -> float:
    return math.cos(2.0 * (theta1 - theta2))


def chsh_pairs(count: int = 4) -> list[tuple[int, int]]:
    """Station-crossing pairs for settings ordered ``(a, a', b, b')``."""
    if count != 4:
        raise FamilyError("CHSH mode needs exactly four settings")
    return [(0, 2), (0, 3), (1, 2), (1, 3)]


def singlet_family(angles: AngleSet | Sequence[float], chsh: bool = False) -> MarginalFamily:
    """One variable per setting, one singlet table per pair.

    With ``chsh=True`` and four settings ``(a, a', b, b')`` only the four
    cross-station pairs are included.
    """
    if not isinstance(angles, AngleSet):
        angles = AngleSet(angles)
    th = angles.angles
    k = len(th)
    pairs = chsh_pairs(k) if chsh else [(i, j) for i in range(k) for j in range(i + 1, k)]
    labels = [f"theta={math.degrees(t):g}deg" for t in th]
    tables = [
        singlet_pair_table(th[i], th[j], pair=(VariableId(i, labels[i]), VariableId(j, labels[j])))
        for i, j in pairs
    ]
    return MarginalFamily(k, tables, labels)
