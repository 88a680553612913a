"""Coincidence-count ingestion and statistical analysis.

Files carry angles in degrees; everything in memory is in radians.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .core import CoincidenceRecord, MarginalFamily, PairwiseTable, VariableId
from .inequalities import InequalityReport, bell_covariance, chsh, wigner
from .singlet import singlet_pair_table

COINCIDENCE_HEADER = ["theta1_deg", "theta2_deg", "n_pp", "n_pm", "n_mp", "n_mm"]
FAMILY_HEADER = ["var_i", "var_j", "p_pp", "p_pm", "p_mp", "p_mm"]
CELL_NAMES = ("++", "+-", "-+", "--")
ANGLE_MATCH = 1e-9


class DataError(ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, path=None):
        where = f"{path}:{line}: " if path is not None and line else (f"line {line}: " if line else "")
        super().__init__(where + message)
        self.line = line


def _rows(path) -> Iterable[tuple[int, list[str]]]:
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            yield lineno, [c.strip() for c in row]


def _header(rows, expected, path):
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise DataError("empty file", path=path) from None
    if header != expected:
        raise DataError(f"expected header {','.join(expected)!r}, got {','.join(header)!r}", lineno, path)


def parse_coincidence_csv(path) -> list[CoincidenceRecord]:
    rows = _rows(path)
    _header(rows, COINCIDENCE_HEADER, path)
    out = []
    for lineno, row in rows:
        if len(row) != 6:
            raise DataError(f"expected 6 fields, got {len(row)}", lineno, path)
        try:
            t1, t2 = float(row[0]), float(row[1])
        except ValueError:
            raise DataError(f"angles must be numbers, got {row[0]!r}, {row[1]!r}", lineno, path) from None
        counts = []
        for name, raw in zip(COINCIDENCE_HEADER[2:], row[2:]):
            try:
                c = int(raw)
            except ValueError:
                raise DataError(f"{name} must be an integer, got {raw!r}", lineno, path) from None
            if c < 0:
                raise DataError(f"{name} must be nonnegative, got {c}", lineno, path)
            counts.append(c)
        if sum(counts) == 0:
            raise DataError("zero total count", lineno, path)
        out.append(CoincidenceRecord(math.radians(t1), math.radians(t2), *counts))
    if not out:
        raise DataError("no data rows", path=path)
    return out


def _fmt_angle(rad: float) -> str:
    return repr(round(math.degrees(rad), 9))


def write_coincidence_csv(path, records: Sequence[CoincidenceRecord]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COINCIDENCE_HEADER)
        for r in records:
            w.writerow([_fmt_angle(r.theta1), _fmt_angle(r.theta2), *r.counts])


def _number(raw: str):
    # keep rationals exact: "1/2" and "0.25" both become Fractions
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise ValueError(raw) from None


def parse_family_csv(path, exact: bool = True) -> MarginalFamily:
    """Read ``var_i,var_j,p_pp,p_pm,p_mp,p_mm`` rows.

    Variable columns hold integer indices or free labels; labels are numbered
    in order of first appearance. Probabilities accept decimals or ``p/q``.
    """
    rows = _rows(path)
    _header(rows, FAMILY_HEADER, path)
    names: dict[str, int] = {}
    tables = []
    for lineno, row in rows:
        if len(row) != 6:
            raise DataError(f"expected 6 fields, got {len(row)}", lineno, path)
        idx = []
        for raw in row[:2]:
            if raw not in names:
                names[raw] = len(names)
            idx.append(names[raw])
        try:
            cells = [_number(x) for x in row[2:]]
        except ValueError as exc:
            raise DataError(f"probability must be a number, got {exc.args[0]!r}", lineno, path) from None
        if not exact:
            cells = [float(x) for x in cells]
        labels = list(names)
        tables.append(PairwiseTable((VariableId(idx[0], labels[idx[0]]), VariableId(idx[1], labels[idx[1]])), cells))
    if not tables:
        raise DataError("no data rows", path=path)
    if all(name.isdigit() for name in names):
        # numeric names are indices as written
        remap = {names[name]: int(name) for name in names}
        n = max(remap.values()) + 1
        tables = [PairwiseTable((remap[t.indices[0]], remap[t.indices[1]]), t.p) for t in tables]
        return MarginalFamily(n, tables)
    return MarginalFamily(len(names), tables, list(names))


def write_family_csv(path, family: MarginalFamily):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FAMILY_HEADER)
        for t in family.tables:
            w.writerow([*t.indices, *(str(x) for x in t.p)])


# --- estimates ----------------------------------------------------------------

def empirical_table(record: CoincidenceRecord) -> tuple[PairwiseTable, tuple[float, ...]]:
    """Cell frequencies and their binomial standard errors ``sqrt(p(1-p)/N)``."""
    total = record.total
    if total <= 0:
        raise DataError("zero total count")
    freqs = [c / total for c in record.counts]
    se = tuple(math.sqrt(p * (1 - p) / total) for p in freqs)
    return PairwiseTable((0, 1), freqs), se


def correlation_estimate(record: CoincidenceRecord) -> tuple[float, float]:
    """``E`` from frequencies, with standard error ``sqrt((1 - E^2)/N)``."""
    table, _ = empirical_table(record)
    pp, pm, mp, mm = table.p
    e = pp - pm - mp + mm
    return e, math.sqrt(max(0.0, 1 - e * e) / record.total)


# --- anomaly analysis -----------------------------------------------------------

@dataclass(frozen=True)
class AnomalyReport:
    theta1: float
    theta2: float
    deviations: dict
    delta_e: float
    compensation_residual: float
    marginal_deviations: dict
    total_deviation: float
    combinations: list = field(default_factory=list)
    tol: float = 1e-12

    @property
    def flagged(self) -> list[str]:
        """Deviations that do not cancel in the correlation."""
        out = [f"P_{k} deviates by {v:+.6g}" for k, v in self.deviations.items() if abs(v) > self.tol]
        out += [f"marginal {k} deviates by {v:+.6g}" for k, v in self.marginal_deviations.items() if abs(v) > self.tol]
        if abs(self.total_deviation) > self.tol:
            out.append(f"normalization deviates by {self.total_deviation:+.6g}")
        return out

    def as_dict(self) -> dict:
        return {
            "theta1_deg": math.degrees(self.theta1),
            "theta2_deg": math.degrees(self.theta2),
            "deviations": self.deviations,
            "delta_E": self.delta_e,
            "compensation_residual": self.compensation_residual,
            "marginal_deviations": self.marginal_deviations,
            "total_deviation": self.total_deviation,
            "combinations": self.combinations,
            "flags": self.flagged,
        }


def combination_deviation(report: AnomalyReport, coefficients: Sequence[float]) -> float:
    """``sum_xy c_xy * delta_xy`` for coefficients in ``++, +-, -+, --`` order."""
    if len(coefficients) != 4:
        raise ValueError("need four coefficients (++, +-, -+, --)")
    return sum(c * report.deviations[k] for c, k in zip(coefficients, CELL_NAMES))


def anomaly_analysis(
    records: Sequence[CoincidenceRecord],
    reference: Callable[[float, float], PairwiseTable] = singlet_pair_table,
    combinations: Sequence[Sequence[float]] = (),
    tol: float = 1e-12,
) -> list[AnomalyReport]:
    """Per-record deviations of frequencies from the reference predictions."""
    reports = []
    for rec in records:
        table, _ = empirical_table(rec)
        ref = reference(rec.theta1, rec.theta2)
        dev = {k: float(e) - float(q) for k, e, q in zip(CELL_NAMES, table.p, ref.p)}
        e_exp = table.p[0] - table.p[1] - table.p[2] + table.p[3]
        e_ref = float(ref.p[0] - ref.p[1] - ref.p[2] + ref.p[3])
        residual = dev["++"] - dev["+-"] - dev["-+"] + dev["--"]
        marg = {"A+": dev["++"] + dev["+-"], "B+": dev["++"] + dev["-+"]}
        rep = AnomalyReport(
            rec.theta1, rec.theta2, dev, e_exp - e_ref, residual, marg, sum(dev.values()), tol=tol
        )
        rep.combinations.extend(
            {"coefficients": list(c), "deviation": combination_deviation(rep, c)} for c in combinations
        )
        reports.append(rep)
    return reports


# --- cross-context evaluation ------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    name: str
    value: float
    stderr: float
    context: tuple[float, float]

    def as_dict(self):
        return {
            "name": self.name,
            "value": self.value,
            "stderr": self.stderr,
            "context_deg": [math.degrees(x) for x in self.context],
        }


@dataclass(frozen=True)
class CrossContextEvaluation:
    inequality: str
    settings: tuple[float, ...]
    records: tuple[CoincidenceRecord, ...]
    estimates: tuple[Estimate, ...]
    report: InequalityReport
    stderr: float
    sigma_k: float

    @property
    def margin_in_sigma(self) -> float:
        return self.report.margin / self.stderr if self.stderr > 0 else math.copysign(math.inf, self.report.margin)

    def as_dict(self) -> dict:
        return {
            "inequality": self.inequality,
            "settings_deg": [math.degrees(x) for x in self.settings],
            "estimates": [e.as_dict() for e in self.estimates],
            "report": self.report.as_dict(),
            "stderr": self.stderr,
            "sigma_k": self.sigma_k,
            "margin_in_sigma": self.margin_in_sigma,
        }


def _same_angle(x: float, y: float) -> bool:
    return abs(math.remainder(x - y, 2 * math.pi)) < ANGLE_MATCH


def find_context(records: Iterable[CoincidenceRecord], t1: float, t2: float) -> CoincidenceRecord:
    """Record measured at ``(t1, t2)``; a record at ``(t2, t1)`` is transposed."""
    for r in records:
        if _same_angle(r.theta1, t1) and _same_angle(r.theta2, t2):
            return r
    for r in records:
        if _same_angle(r.theta1, t2) and _same_angle(r.theta2, t1):
            return CoincidenceRecord(t1, t2, r.n_pp, r.n_mp, r.n_pm, r.n_mm)
    raise DataError(f"missing context ({math.degrees(t1):g}, {math.degrees(t2):g}) deg")


REQUIRED_PAIRS = {
    # inequality -> (estimate name, setting index pair) in the order the formula uses
    "bell": (("e_ab", (0, 1)), ("e_cb", (2, 1)), ("e_ac", (0, 2))),
    "wigner": (("p_ab_pp", (0, 1)), ("p_bc_mp", (1, 2)), ("p_ac_pp", (0, 2))),
    "chsh": (("e_ab", (0, 2)), ("e_ab'", (0, 3)), ("e_a'b", (1, 2)), ("e_a'b'", (1, 3))),
}
SETTING_COUNT = {"bell": 3, "wigner": 3, "chsh": 4}


def evaluate_cross_context(
    records: Sequence[CoincidenceRecord] | Mapping,
    inequality: str,
    settings: Sequence[float],
    sigma_k: float = 5.0,
) -> CrossContextEvaluation:
    """Assemble one inequality from estimates that each come from a single context.

    ``settings`` are ``(a, b, c)`` for ``bell``/``wigner`` and
    ``(a, a', b, b')`` for ``chsh``, in radians. Contexts are assumed
    independent, so variances add. ``report.violated`` holds iff the margin
    exceeds ``sigma_k`` standard errors.
    """
    if inequality not in REQUIRED_PAIRS:
        raise ValueError(f"unknown inequality {inequality!r}; choose from {sorted(REQUIRED_PAIRS)}")
    if isinstance(records, Mapping):
        records = list(records.values())
    settings = tuple(float(s) for s in settings)
    if len(settings) != SETTING_COUNT[inequality]:
        raise DataError(f"{inequality} needs {SETTING_COUNT[inequality]} settings, got {len(settings)}")
    estimates = []
    used = []
    for name, (i, j) in REQUIRED_PAIRS[inequality]:
        rec = find_context(records, settings[i], settings[j])
        used.append(rec)
        if name.startswith("e_"):
            value, se = correlation_estimate(rec)
        else:
            table, ses = empirical_table(rec)
            cell = 0 if name.endswith("_pp") else 2  # p_bc_mp is P(b=-1, c=+1)
            value, se = table.p[cell], ses[cell]
        estimates.append(Estimate(name, value, se, (settings[i], settings[j])))
    stderr = math.sqrt(sum(e.stderr**2 for e in estimates))
    values = [e.value for e in estimates]
    tol = sigma_k * stderr
    if inequality == "bell":
        report = bell_covariance(*values, tol=tol)
    elif inequality == "wigner":
        report = wigner(*values, tol=tol)
    else:
        report = chsh(*values, tol=tol)
    return CrossContextEvaluation(inequality, settings, tuple(used), tuple(estimates), report, stderr, sigma_k)
