"""Command-line entry point.

Every subcommand prints a short text summary and writes one JSON report
(to ``--out`` or stdout). Exit codes: 0 success, 1 a finding the caller asked
to treat as failure (``--fail-on-finding``), 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .analysis import (
    DataError,
    anomaly_analysis,
    correlation_estimate,
    empirical_table,
    evaluate_cross_context,
    parse_coincidence_csv,
    parse_family_csv,
    write_coincidence_csv,
)
from .config import ConfigError, load_config
from .core import FamilyError
from .inequalities import (
    bell_covariance,
    chsh,
    legget_joint_average,
    legget_two_step,
    model_from_joint,
    wigner,
)
from .marginal import check_compatibility, solve_quasi, verify_certificate
from .simulate import (
    post_select,
    pool_records,
    run_with_drift,
    sample_context,
    sample_from_table,
    sample_threshold,
)
from .singlet import AngleSet, singlet_correlation, singlet_family, singlet_pair_table

EXIT_OK, EXIT_FINDING, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _num(x):
    """JSON-friendly number: exact rationals become ``"p/q"`` strings."""
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def _angles(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"angles must be comma-separated numbers, got {text!r}") from None


def _mode(args) -> str:
    return args.mode or "auto"


def _table_dict(t):
    return {"pair": list(t.indices), "cells": [_num(x) for x in t.p]}


# --- subcommands ------------------------------------------------------------------

def cmd_check(args):
    family = parse_family_csv(args.family, exact=args.mode != "float")
    v = check_compatibility(family, mode=_mode(args), tol=args.tolerance)
    doc = {
        "family": [_table_dict(t) for t in family.tables],
        "n": family.n,
        "status": v.status.value,
        "mode": v.mode,
        "residual": _num(v.residual),
    }
    if v.witness is not None:
        doc["witness"] = [_num(x) for x in v.witness.w]
    if v.certificate is not None:
        doc["certificate"] = [_num(x) for x in v.certificate]
        checked = family if v.mode == "exact" else family.as_float()
        if v.mode == "exact" and not family.exact:
            checked = family.as_fraction(10**9)
        doc["certificate_bound"] = _num(verify_certificate(checked, v.certificate))
    summary = f"{family.n} variables, {len(family.tables)} tables: {v.status.value} ({v.mode} mode)"
    return doc, summary, not v.feasible


def cmd_quasi(args):
    family = parse_family_csv(args.family, exact=args.mode != "float")
    q = solve_quasi(family, mode=_mode(args))
    doc = {
        "n": family.n,
        "mode": q.mode,
        "negativity": _num(q.negativity),
        "joint": [_num(x) for x in q.joint.w],
    }
    summary = f"minimal negativity {q.negativity} ({q.mode} mode)"
    return doc, summary, q.negativity > 0


def cmd_predict(args):
    deg = _angles(args.angles)
    angles = AngleSet.from_degrees(deg)
    th = angles.angles
    tables = []
    for i in range(len(th)):
        for j in range(i + 1, len(th)):
            t = singlet_pair_table(th[i], th[j])
            tables.append({
                "settings_deg": [deg[i], deg[j]],
                "cells": list(t.p),
                "correlation": singlet_correlation(th[i], th[j]),
            })
    reports = []
    if len(th) == 3:
        a, b, c = th
        reports.append(bell_covariance(
            singlet_correlation(a, b), singlet_correlation(c, b), singlet_correlation(a, c)
        ))
        reports.append(wigner(
            singlet_pair_table(a, b).p[0], singlet_pair_table(b, c).p[2], singlet_pair_table(a, c).p[0]
        ))
    else:
        a, a2, b, b2 = th
        reports.append(chsh(
            singlet_correlation(a, b), singlet_correlation(a, b2),
            singlet_correlation(a2, b), singlet_correlation(a2, b2),
        ))
    family = singlet_family(angles, chsh=len(th) == 4 and args.chsh)
    verdict = check_compatibility(family, mode=_mode(args), tol=args.tolerance)
    doc = {
        "angles_deg": deg,
        "tables": tables,
        "inequalities": [r.as_dict() for r in reports],
        "compatibility": {"status": verdict.status.value, "mode": verdict.mode},
    }
    flags = ", ".join(f"{r.name} {'violated' if r.violated else 'satisfied'}" for r in reports)
    summary = f"singlet at {deg} deg: {flags}; joint distribution {verdict.status.value}"
    return doc, summary, any(r.violated for r in reports)


def _record_dict(rec, discarded=None):
    table, se = empirical_table(rec) if rec.total else (None, None)
    d = {
        "settings_deg": [round(math.degrees(rec.theta1), 9), round(math.degrees(rec.theta2), 9)],
        "counts": list(rec.counts),
        "total": rec.total,
    }
    if discarded is not None:
        d["discarded"] = discarded
    if table is not None:
        e, e_se = correlation_estimate(rec)
        d.update(frequencies=list(table.p), stderr=list(se), correlation=e, correlation_stderr=e_se)
    else:
        d["zero_total"] = True
    return d


def cmd_simulate(args):
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    trials = cfg.trials if args.trials is None else args.trials
    workers = cfg.workers if args.workers is None else args.workers
    if seed < 0 or trials < 1:
        raise InputError("seed must be >= 0 and trials >= 1")
    records, contexts = [], []
    for k, (settings, spec) in enumerate(cfg.contexts):
        ctx_seed = seed + 1_000_003 * k
        if cfg.model == "table":
            streams = [sample_from_table(spec, trials, ctx_seed, settings, workers)]
        elif cfg.model == "threshold":
            streams = [sample_threshold(cfg.threshold, settings, trials, ctx_seed, workers)]
        elif cfg.model == "context":
            streams = [sample_context(spec, trials, ctx_seed, workers)]
        else:
            streams = run_with_drift(spec, trials, ctx_seed, workers)
        selected = [post_select(s) for s in streams]
        pooled = pool_records([r for r, _ in selected])
        entry = _record_dict(pooled, sum(d for _, d in selected))
        if len(streams) > 1:
            entry["runs"] = [_record_dict(r, d) for r, d in selected]
        contexts.append(entry)
        records.append(pooled)
    doc = {"model": cfg.model, "seed": seed, "trials_per_context": trials, "contexts": contexts}
    finding = False
    summary = f"{cfg.model} model, {len(records)} contexts x {trials} trials, seed {seed}"
    if cfg.inequality:
        ev = evaluate_cross_context([r for r in records if r.total], cfg.inequality, cfg.inequality_settings, args.sigma_k)
        doc["cross_context"] = ev.as_dict()
        finding = ev.report.violated
        summary += f"; {cfg.inequality} margin {ev.report.margin:+.6f} ({ev.margin_in_sigma:+.2f} sigma)"
    if args.csv:
        write_coincidence_csv(args.csv, [r for r in records if r.total])
        doc["csv"] = str(args.csv)
    return doc, summary, finding


def cmd_analyze(args):
    records = parse_coincidence_csv(args.data)
    combos = []
    for text in args.combination or ():
        c = _angles(text)
        if len(c) != 4:
            raise InputError(f"a combination needs four coefficients, got {text!r}")
        combos.append(c)
    reports = anomaly_analysis(records, combinations=combos, tol=args.tolerance)
    doc = {"records": [r.as_dict() for r in reports]}
    flagged = sum(1 for r in reports if r.flagged)
    summary = f"{len(reports)} records, {flagged} with deviations from the singlet prediction"
    return doc, summary, flagged > 0


def _legget_outcomes():
    def A(a, b, u, v, lam):
        return np.where(np.cos(2.0 * (u - a)) + lam >= 0, 1, -1)

    def B(a, b, u, v, lam):
        return np.where(np.cos(2.0 * (v - b)) + lam >= 0, 1, -1)

    return A, B


def cmd_legget(args):
    try:
        nu, nv, nl = (int(x) for x in args.grid.split(","))
    except ValueError:
        raise InputError(f"--grid must be three integers like 4,4,8, got {args.grid!r}") from None
    if min(nu, nv, nl) < 1:
        raise InputError("grid sizes must be positive")
    rng = np.random.default_rng(args.seed)
    U = np.linspace(0, math.pi, nu, endpoint=False)
    V = np.linspace(0, math.pi, nv, endpoint=False)
    lam = np.linspace(-1, 1, nl)
    A, B = _legget_outcomes()
    settings = [(0.0, math.pi / 8), (0.0, 3 * math.pi / 8), (math.pi / 4, math.pi / 8), (math.pi / 4, 3 * math.pi / 8)]
    worst = 0.0
    for _ in range(args.trials):
        P = rng.dirichlet(np.ones(nu * nv * nl)).reshape(nu, nv, nl)
        a, b = settings[rng.integers(len(settings))]
        two = legget_two_step(model_from_joint(P, A, B, a, b, U, V, lam))
        worst = max(worst, abs(two - legget_joint_average(P, A, B, a, b, U, V, lam)))

    # correlations at the four CHSH settings, with one P or one P per setting
    shape = (nu, nv, nl)
    uu, vv, ll = np.meshgrid(U, V, lam, indexing="ij")
    shared = rng.dirichlet(np.ones(nu * nv * nl)).reshape(shape)
    targets = [1, 1, 1, -1]
    corr = []
    for (a, b), target in zip(settings, targets):
        if args.regime == "independent":
            P = shared
        else:
            # setting-dependent weight: all mass where A*B matches the CHSH sign pattern
            ab = A(a, b, uu, vv, ll) * B(a, b, uu, vv, ll)
            P = (ab == target).astype(float)
            if P.sum() == 0:
                P = np.ones(shape)
            P /= P.sum()
        corr.append(legget_two_step(model_from_joint(P, A, B, a, b, U, V, lam)))
    rep = chsh(*corr)
    doc = {
        "grid": [nu, nv, nl],
        "random_checks": args.trials,
        "max_identity_discrepancy": worst,
        "identity_tolerance": 1e-12,
        "regime": args.regime,
        "chsh_settings_deg": [[math.degrees(a), math.degrees(b)] for a, b in settings],
        "correlations": corr,
        "chsh": rep.as_dict(),
    }
    summary = (
        f"two-step vs joint average: max discrepancy {worst:.3g} over {args.trials} draws; "
        f"{args.regime} regime CHSH {rep.lhs:.6f} ({'violated' if rep.violated else 'satisfied'})"
    )
    return doc, summary, worst > 1e-12


def cmd_cross(args):
    records = parse_coincidence_csv(args.data)
    settings = [math.radians(x) for x in _angles(args.angles)]
    ev = evaluate_cross_context(records, args.inequality, settings, args.sigma_k)
    summary = (
        f"{args.inequality}: lhs {ev.report.lhs:.6f}, rhs {ev.report.rhs:.6f}, "
        f"margin {ev.report.margin:+.6f} +/- {ev.stderr:.6f} "
        f"({'violated' if ev.report.violated else 'not violated'} at {args.sigma_k:g} sigma)"
    )
    return ev.as_dict(), summary, ev.report.violated


COMMANDS = {
    "check": cmd_check,
    "quasi": cmd_quasi,
    "predict": cmd_predict,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "legget": cmd_legget,
    "cross": cmd_cross,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--tolerance", type=float, default=1e-9)
    common.add_argument("--sigma-k", type=float, default=5.0, dest="sigma_k")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    mode.add_argument("--float", dest="mode", action="store_const", const="float")
    common.add_argument("--fail-on-finding", action="store_true",
                        help="exit 1 when the analysis reports infeasibility, violation or anomaly")

    p = argparse.ArgumentParser(prog="bellcompat", description="Probabilistic compatibility and Bell-type analysis.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="decide whether a joint distribution exists")
    s.add_argument("--family", required=True, help="CSV: var_i,var_j,p_pp,p_pm,p_mp,p_mm")
    s = sub.add_parser("quasi", parents=[common], help="least-negative signed joint")
    s.add_argument("--family", required=True)
    s = sub.add_parser("predict", parents=[common], help="singlet tables and inequality reports")
    s.add_argument("--angles", required=True, help="3 or 4 settings in degrees, e.g. 0,60,30")
    s.add_argument("--chsh", action="store_true", help="four angles (a,a',b,b'): cross-station pairs only")
    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo from a TOML config")
    s.add_argument("--config", required=True)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--csv", help="also write post-selected counts in coincidence CSV format")
    s = sub.add_parser("analyze", parents=[common], help="deviations of counts from singlet predictions")
    s.add_argument("--data", required=True)
    s.add_argument("--combination", action="append", help="coefficients for ++,+-,-+,-- (repeatable)")
    s.set_defaults(tolerance=1e-12)
    s = sub.add_parser("legget", parents=[common], help="two-step vs joint averaging check")
    s.add_argument("--grid", default="4,4,8", help="u,v,lambda grid sizes")
    s.add_argument("--regime", choices=("independent", "dependent"), default="independent",
                   help="one weight P(u,v,lam) for all settings, or one per setting pair")
    s = sub.add_parser("cross", parents=[common], help="inequality assembled across contexts")
    s.add_argument("--data", required=True)
    s.add_argument("--inequality", choices=("bell", "wigner", "chsh"), default="bell")
    s.add_argument("--angles", required=True, help="a,b,c (bell/wigner) or a,a',b,b' (chsh) in degrees")
    return p


def _report(command: str, args, doc: dict, summary: str) -> str:
    # the worker count cannot change any result, so it stays out of the echo
    skip = ("out", "command", "workers")
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}
    full = {"tool": "bellcompat", "version": __version__, "command": command,
            "inputs": inputs, "summary": summary, "result": doc}
    return json.dumps(full, indent=2, sort_keys=True, default=_num) + "\n"


def run_command(argv=None) -> tuple[int, str]:
    """Run one subcommand; returns ``(exit code, JSON report or error text)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_INPUT if exc.code else EXIT_OK), ""
    if args.command == "legget":
        args.seed = 0 if args.seed is None else args.seed
        args.trials = 1000 if args.trials is None else args.trials
    try:
        doc, summary, finding = COMMANDS[args.command](args)
    except (InputError, DataError, ConfigError, FamilyError, ValueError, OSError) as exc:
        msg = f"error: {exc}"
        print(msg, file=sys.stderr)
        return EXIT_INPUT, msg
    text = _report(args.command, args, doc, summary)
    print(summary, file=sys.stderr if not args.out else sys.stdout)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT, text
    else:
        sys.stdout.write(text)
    return (EXIT_FINDING if finding and args.fail_on_finding else EXIT_OK), text


def main(argv=None) -> int:
    return run_command(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
