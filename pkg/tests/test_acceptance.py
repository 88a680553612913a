"""The ten acceptance criteria, one test each.

Every test prints a single ``PASS`` or ``FAIL`` line (visible even under
output capture) and then asserts the same condition at the stated tolerance.
Run ``pytest tests/test_acceptance.py -v`` to see the lines.
"""

import itertools
import json
import math
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from bellcompat import (
    AngleSet,
    CoincidenceRecord,
    ContextSpec,
    DiscreteDensity,
    UniformDensity,
    anomaly_analysis,
    bell_covariance,
    brute_force_compatibility,
    check_compatibility,
    chsh,
    legget_joint_average,
    legget_two_step,
    model_from_joint,
    post_select,
    sample_context,
    sign_cos2,
    singlet_correlation,
    singlet_family,
    singlet_pair_table,
    solve_quasi,
    wigner,
)
from bellcompat.analysis import evaluate_cross_context
from bellcompat.cli import run_command
from bellcompat.config import flip_at
from bellcompat.core import atom_signs
from conftest import contradictory_tables, random_rational_family
from oracles import line_negativity

DATA = Path(__file__).resolve().parents[1] / "demos" / "data"
TOL = 1e-12
deg = math.radians


@pytest.fixture
def judge(capsys):
    def report(number, title, checks, elapsed=None, limit=None):
        if limit is not None:
            checks = dict(checks, **{f"runtime {elapsed:.2f}s < {limit}s": elapsed < limit})
        failed = [k for k, ok in checks.items() if not ok]
        line = f"{'FAIL' if failed else 'PASS'} criterion {number}: {title}"
        if failed:
            line += " | failed: " + "; ".join(failed)
        with capsys.disabled():
            print("\n" + line)
        assert not failed, line

    return report


def tables_of(family):
    return {t.indices: dict(zip([(1, 1), (1, -1), (-1, 1), (-1, -1)], t.p)) for t in family.tables}


def test_criterion_1_example_infeasible(judge):
    t0 = time.perf_counter()
    code, text = run_command(["check", "--family", str(DATA / "example_family.csv"), "--exact"])
    res = json.loads(text)["result"]
    r = bell_covariance(1, -1, 1)
    elapsed = time.perf_counter() - t0
    judge(1, "example family INFEASIBLE (exact); Bell lhs 2, rhs 0", {
        "exit code 0": code == 0,
        "status INFEASIBLE": res["status"] == "INFEASIBLE",
        "exact mode": res["mode"] == "exact",
        "lhs == 2 and rhs == 0 exactly": (r.lhs, r.rhs) == (2, 0),
    }, elapsed, 1.0)


def test_criterion_2_quasi_negativity(judge):
    from bellcompat import MarginalFamily

    t0 = time.perf_counter()
    code, text = run_command(["quasi", "--family", str(DATA / "example_family.csv")])
    neg_cli = Fraction(json.loads(text)["result"]["negativity"])
    q = solve_quasi(MarginalFamily(3, contradictory_tables()))
    elapsed = time.perf_counter() - t0
    oracle = line_negativity(3, tables_of(MarginalFamily(3, contradictory_tables())))
    judge(2, f"example negativity {q.negativity} (oracle {oracle})", {
        "exact 1/2": q.negativity == Fraction(1, 2) and neg_cli == Fraction(1, 2),
        "matches independent oracle": oracle == q.negativity,
        "within 1e-12 of 0.5": abs(float(q.negativity) - 0.5) <= TOL,
    }, elapsed, 1.0)


def test_criterion_3_singlet_tables(judge):
    cases = {(0, 0): (0.5, 0, 0, 0.5), (0, 60): (0.125, 0.375, 0.375, 0.125), (0, 90): (0, 0.5, 0.5, 0)}
    checks = {}
    for (x, y), want in cases.items():
        got = singlet_pair_table(deg(x), deg(y)).p
        checks[f"table ({x},{y})"] = max(abs(float(g) - w) for g, w in zip(got, want)) <= TOL
    checks["E(0,60) = -0.5"] = abs(singlet_correlation(0, deg(60)) + 0.5) <= TOL
    judge(3, "singlet tables and E(0,60)", checks)


def test_criterion_4_wigner_violation(judge):
    t0 = time.perf_counter()
    a, b, c = deg(0), deg(60), deg(30)
    r = wigner(singlet_pair_table(a, b).prob(1, 1), singlet_pair_table(b, c).prob(-1, 1),
               singlet_pair_table(a, c).prob(1, 1))
    v = check_compatibility(singlet_family(AngleSet((a, b, c))))
    elapsed = time.perf_counter() - t0
    judge(4, f"Wigner sum {r.rhs:.6f} < {r.lhs:.6f}; joint {v.status.value}", {
        "sum side 0.25": abs(r.rhs - 0.25) <= TOL,
        "single side 0.375": abs(r.lhs - 0.375) <= TOL,
        "violated": r.violated,
        "INFEASIBLE": not v.feasible,
    }, elapsed, 1.0)


def test_criterion_5_oracle_equivalence(judge):
    rng = random.Random(2024)
    t0 = time.perf_counter()
    total = agree = infeasible = 0
    for _ in range(500):
        fam = random_rational_family(rng, 3)
        main, oracle = check_compatibility(fam), brute_force_compatibility(fam)
        total += 1
        agree += main.status == oracle.status
        infeasible += not main.feasible
    elapsed = time.perf_counter() - t0
    judge(5, f"{agree}/{total} verdicts agree ({infeasible} infeasible)", {
        "at least 500 families": total >= 500,
        "100% agreement": agree == total,
    }, elapsed, 60.0)


def _joint_batch(rng, n, count):
    # mix of dense and sparse (near-vertex) joints
    alpha = np.where(rng.random(count) < 0.5, 1.0, 0.05)
    w = rng.gamma(alpha[:, None], size=(count, 1 << n))
    w /= w.sum(axis=1, keepdims=True)
    signs = atom_signs(n).astype(float)  # (2**n, n)
    return w, signs


def _pair_probs(w, signs, i, j, si, sj):
    mask = (signs[:, i] == si) & (signs[:, j] == sj)
    return w[:, mask].sum(axis=1)


def test_criterion_6_single_joint_bounds(judge):
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    worst = {"bell": -np.inf, "wigner": -np.inf, "chsh": -np.inf}
    count = 10_000
    for n in (3, 4):
        w, s = _joint_batch(rng, n, count)
        E = {(i, j): w @ (s[:, i] * s[:, j]) for i in range(n) for j in range(n) if i != j}
        for a, b, c in itertools.permutations(range(n), 3):
            pab, pbc, pac = _pair_probs(w, s, a, b, 1, 1), _pair_probs(w, s, b, c, -1, 1), _pair_probs(w, s, a, c, 1, 1)
            for k in range(count):
                worst["bell"] = max(worst["bell"], bell_covariance(E[a, b][k], E[c, b][k], E[a, c][k]).margin)
                worst["wigner"] = max(worst["wigner"], wigner(pab[k], pbc[k], pac[k]).margin)
        if n == 4:
            for a, a2, b, b2 in itertools.permutations(range(4)):
                for k in range(count):
                    worst["chsh"] = max(worst["chsh"], chsh(E[a, b][k], E[a, b2][k], E[a2, b][k], E[a2, b2][k]).margin)
    elapsed = time.perf_counter() - t0
    judge(6, f"{2 * count} joints; worst margins " + ", ".join(f"{k} {v:+.2e}" for k, v in worst.items()), {
        f"{k} never exceeded beyond 1e-12": v <= TOL for k, v in worst.items()
    }, elapsed, 60.0)


def test_criterion_7_two_step_identity(judge):
    rng = np.random.default_rng(7)

    def A(a, b, u, v, lam):
        return np.where(np.cos(2 * (u - a)) + lam >= 0, 1, -1)

    def B(a, b, u, v, lam):
        return np.where(np.cos(2 * (v - b)) + lam >= 0, 1, -1)

    t0 = time.perf_counter()
    worst = 0.0
    draws = 1000
    for k in range(draws):
        nu, nv, nl = (4, 4, 8) if k % 10 == 0 else (rng.integers(1, 5), rng.integers(1, 5), rng.integers(1, 9))
        P = rng.dirichlet(np.full(nu * nv * nl, 0.5)).reshape(nu, nv, nl)
        if k % 3 == 0:
            P[rng.random(P.shape) < 0.4] = 0
            P = P / P.sum() if P.sum() > 0 else np.full(P.shape, 1 / P.size)
        U, V = rng.uniform(0, np.pi, nu), rng.uniform(0, np.pi, nv)
        lam = rng.uniform(-1, 1, nl)
        a, b = rng.uniform(0, np.pi, 2)
        two = legget_two_step(model_from_joint(P, A, B, a, b, U, V, lam))
        worst = max(worst, abs(two - legget_joint_average(P, A, B, a, b, U, V, lam)))
    elapsed = time.perf_counter() - t0
    judge(7, f"{draws} weights on grids up to 4x4x8; max discrepancy {worst:.2e}", {
        "equal to 1e-12": worst <= TOL,
    }, elapsed, 30.0)


def test_criterion_8_simulation_soundness(judge):
    n = 10**6
    a, b, c = 0.0, deg(60), deg(30)
    t0 = time.perf_counter()
    uniform = UniformDensity(0.0, math.pi)
    shared = [post_select(sample_context(ContextSpec(s, uniform, sign_cos2), n, 100 + k))[0]
              for k, s in enumerate([(a, b), (c, b), (a, c)])]
    ev_shared = evaluate_cross_context(shared, "bell", (a, b, c), sigma_k=5.0)

    rule = flip_at(c)
    plus_minus = DiscreteDensity([1, -1], [0.5, 0.5])
    per_context = {(a, b): plus_minus, (a, c): plus_minus, (b, c): DiscreteDensity([2, -2], [0.5, 0.5])}
    dependent = [post_select(sample_context(ContextSpec(s, d, rule), n, 200 + k))[0]
                 for k, (s, d) in enumerate(per_context.items())]
    ev_dep = evaluate_cross_context(dependent, "bell", (a, b, c))
    elapsed = time.perf_counter() - t0
    gap = ev_dep.report.margin
    judge(8, f"shared margin {ev_shared.report.margin:+.5f} ({ev_shared.margin_in_sigma:+.2f} sigma); "
             f"context-dependent lhs-rhs {gap:.5f}", {
        "shared density satisfies Bell within 5 sigma": not ev_shared.report.violated,
        "context-dependent lhs - rhs = 1.5 +/- 0.01": abs(gap - 1.5) <= 0.01,
    }, elapsed, 120.0)


def test_criterion_9_determinism(judge, tmp_path):
    outputs = {}
    for cfg in ("shared_hidden", "threshold", "drift"):
        for tag, workers in (("a", 1), ("b", 1), ("c", 4)):
            out = tmp_path / f"{cfg}_{tag}.json"
            code, _ = run_command(["simulate", "--config", str(DATA / f"{cfg}.toml"), "--seed", "7",
                                   "--trials", "140000", "--workers", str(workers), "--out", str(out)])
            outputs[cfg, tag] = (code, out.read_bytes())
    checks = {}
    for cfg in ("shared_hidden", "threshold", "drift"):
        (ca, a), (cb, b), (cc, c) = outputs[cfg, "a"], outputs[cfg, "b"], outputs[cfg, "c"]
        checks[f"{cfg}: repeat identical"] = ca == cb == 0 and a == b
        checks[f"{cfg}: 4 workers identical"] = cc == 0 and a == c
    judge(9, "simulate reports byte-identical across repeats and worker counts", checks)


def test_criterion_10_anomaly_compensation(judge):
    delta = 0.02
    qm = singlet_pair_table(0, deg(60)).p
    injected = [q + d for q, d in zip(qm, (delta, delta, -delta, -delta))]
    rec = CoincidenceRecord(0.0, deg(60), *(round(p * 1000) for p in injected))
    (rep,) = anomaly_analysis([rec], combinations=[(1, 1, -1, -1)])
    judge(10, f"counts {rec.counts}: delta_E {rep.delta_e:+.1e}, (1,1,-1,-1) -> {rep.combinations[0]['deviation']:.12f}", {
        "per-cell deviations 0.02": all(abs(abs(v) - delta) <= TOL for v in rep.deviations.values()),
        "delta_E = 0": abs(rep.delta_e) <= TOL,
        "combination deviates by 0.08": abs(rep.combinations[0]["deviation"] - 0.08) <= TOL,
    })
