import math

import numpy as np
import pytest

from bellcompat import (
    CoincidenceRecord,
    ContextSpec,
    DiscreteDensity,
    Outcome,
    PairwiseTable,
    RunDriftSpec,
    ThresholdDetectionSpec,
    UniformDensity,
    ZeroDensity,
    alternating_drift,
    bell_covariance,
    evaluate_cross_context,
    post_select,
    pool_records,
    run_with_drift,
    sample_context,
    sample_from_table,
    sample_threshold,
    shared_sign,
    sign_cos2,
    singlet_pair_table,
)
from bellcompat.config import flip_at
from bellcompat.simulate import BLOCK, EventStream, block_rng

deg = math.radians


def freqs(stream):
    rec, _ = post_select(stream)
    return np.array(rec.counts) / rec.total


def corr(stream):
    a = stream.a.astype(float)
    b = stream.b.astype(float)
    return float(np.mean(a * b))


# --- sample_from_table ----------------------------------------------------------

def test_point_mass_table():
    s = sample_from_table(PairwiseTable((0, 1), (1, 0, 0, 0)), 1000, seed=3)
    assert np.all(s.a == 1) and np.all(s.b == 1)
    assert s.trials.tolist() == list(range(1000))


def test_singlet_table_frequencies():
    s = sample_from_table(singlet_pair_table(0, deg(60)), 10**6, seed=11)
    assert abs(freqs(s)[0] - 0.125) < 0.002
    assert not np.any(s.a == 0) and not np.any(s.b == 0)


def test_table_sampling_deterministic_across_workers():
    t = singlet_pair_table(0, deg(60))
    n = 3 * BLOCK + 17
    one = sample_from_table(t, n, seed=5)
    assert one.identical(sample_from_table(t, n, seed=5))
    assert one.identical(sample_from_table(t, n, seed=5, workers=4))
    assert not one.identical(sample_from_table(t, n, seed=6))


def test_prefix_stability():
    t = singlet_pair_table(0, deg(30))
    short = sample_from_table(t, BLOCK + 5, seed=2)
    long = sample_from_table(t, 2 * BLOCK, seed=2)
    assert np.array_equal(short.a, long.a[: BLOCK + 5])


def test_invalid_inputs():
    bad = PairwiseTable((0, 1), (0.6, 0.5, 0, 0))
    with pytest.raises(ValueError):
        sample_from_table(bad, 10, seed=0)
    with pytest.raises(ValueError):
        sample_from_table(PairwiseTable((0, 1), (1, 0, 0, 0)), 0, seed=0)
    with pytest.raises(ValueError):
        block_rng(-1, 0, 0)


def test_streams_are_read_only():
    s = sample_from_table(PairwiseTable((0, 1), (0.25,) * 4), 10, seed=0)
    with pytest.raises(ValueError):
        s.a[0] = 0
    with pytest.raises(ValueError):
        EventStream((0, 0), [0, 0], [1, 1], [1, 1])
    assert next(s.events())[0] == 0


# --- sample_context -----------------------------------------------------------

UNIFORM = UniformDensity(0.0, math.pi)


def test_perfectly_correlated_local_model():
    spec = ContextSpec((0.0, deg(60)), UniformDensity(-1, 1), shared_sign, (UNIFORM, UNIFORM))
    s = sample_context(spec, 20000, seed=1)
    assert corr(s) == 1.0


def test_context_sampling_deterministic():
    spec = ContextSpec((0.0, deg(60)), UNIFORM, sign_cos2, (UNIFORM, UNIFORM), lambda t, l, lt: np.full(len(l), 0.8))
    n = 2 * BLOCK + 1
    s = sample_context(spec, n, seed=9)
    assert s.identical(sample_context(spec, n, seed=9, workers=3))
    assert np.any(s.a == Outcome.NO_CLICK)


def test_locality_outcomes_ignore_far_setting():
    n = 5000
    for far in (0.0, deg(30), deg(60), deg(90)):
        s = sample_context(ContextSpec((deg(10), far), UNIFORM, sign_cos2), n, seed=4)
        ref = sample_context(ContextSpec((deg(10), deg(45)), UNIFORM, sign_cos2), n, seed=4)
        assert np.array_equal(s.a, ref.a)
        s = sample_context(ContextSpec((far, deg(10)), UNIFORM, sign_cos2), n, seed=4)
        assert np.array_equal(s.b, ref.a)


def test_local_rule_matches_triangle_correlation():
    # sign(cos 2(lam - theta)) with uniform lam gives E = 1 - 4|delta|/pi on [0, pi/2]
    s = sample_context(ContextSpec((0.0, deg(60)), UNIFORM, sign_cos2), 200000, seed=8)
    assert corr(s) == pytest.approx(1 - 4 * (math.pi / 3) / math.pi, abs=5 * math.sqrt(1 / 200000))


def _shared_records(n, seed):
    a, b, c = 0.0, deg(60), deg(30)
    recs = []
    for k, (x, y) in enumerate([(a, b), (c, b), (a, c)]):
        recs.append(post_select(sample_context(ContextSpec((x, y), UNIFORM, sign_cos2), n, seed + k))[0])
    return recs, (a, b, c)


def test_shared_density_satisfies_bell_within_5_sigma():
    recs, settings = _shared_records(200000, seed=21)
    ev = evaluate_cross_context(recs, "bell", settings)
    assert not ev.report.violated
    assert ev.report.margin <= 5 * ev.stderr


PER_CONTEXT = {
    # context -> hidden density; flip_at(30 deg) negates the outcome at that setting unless |lam| == 1
    (0, 60): DiscreteDensity([1, -1], [0.5, 0.5]),
    (0, 30): DiscreteDensity([1, -1], [0.5, 0.5]),
    (60, 30): DiscreteDensity([2, -2], [0.5, 0.5]),
}


def contradictory_records(n, seed):
    rule = flip_at(deg(30))
    recs = []
    for k, ((x, y), dens) in enumerate(PER_CONTEXT.items()):
        recs.append(post_select(sample_context(ContextSpec((deg(x), deg(y)), dens, rule), n, seed + k))[0])
    return recs


def test_context_dependent_model_reproduces_example_tables():
    recs = contradictory_records(10000, seed=0)
    for rec in recs[:2]:
        assert rec.n_pm == rec.n_mp == 0 and abs(rec.n_pp / rec.total - 0.5) < 0.02
    assert recs[2].n_pp == recs[2].n_mm == 0


def test_context_dependent_model_bell_gap():
    # <a1,a2> = <a1,a3> = 1 and <a2,a3> = -1 leave a gap of exactly 2 for every labelling
    recs = contradictory_records(10000, seed=0)
    ev = evaluate_cross_context(recs, "bell", (0.0, deg(60), deg(30)))
    assert ev.report.violated
    assert ev.report.margin == 2
    assert bell_covariance(1, -1, 1).margin == 2


# --- threshold detection --------------------------------------------------------

def _rate(stream, side=0):
    arr = stream.a if side == 0 else stream.b
    return np.count_nonzero(arr) / len(arr)


def test_threshold_no_noise_below_energy_always_clicks():
    spec = ThresholdDetectionSpec(pulse_energy=2.0, noise_law=ZeroDensity(), threshold=1.5)
    s = sample_threshold(spec, (0.0, deg(60)), 10000, seed=0)
    assert _rate(s, 0) == _rate(s, 1) == 1.0


def test_threshold_above_reach_never_clicks():
    spec = ThresholdDetectionSpec(pulse_energy=1.0, noise_law=UniformDensity(-0.999, 0.999), threshold=2.0001)
    s = sample_threshold(spec, (0.0, deg(60)), 10000, seed=0)
    assert _rate(s, 0) == _rate(s, 1) == 0.0
    rec, discarded = post_select(s)
    assert rec.zero_total and discarded == 10000


def test_threshold_symmetric_noise_half_rate():
    n = 10**5
    spec = ThresholdDetectionSpec(pulse_energy=3.0, noise_law=UniformDensity(-1 + 1e-12, 1 - 1e-12), threshold=3.0)
    s = sample_threshold(spec, (0.0, deg(60)), n, seed=0)
    for side in (0, 1):
        assert abs(_rate(s, side) - 0.5) < 3 * math.sqrt(0.25 / n)


def test_threshold_deterministic_and_validated():
    spec = ThresholdDetectionSpec(pulse_energy=1.0, noise_law=UniformDensity(-0.9, 0.9), threshold=1.0)
    n = BLOCK + 3
    assert sample_threshold(spec, (0, 1), n, 1).identical(sample_threshold(spec, (0, 1), n, 1, workers=2))
    with pytest.raises(ValueError):
        ThresholdDetectionSpec(1.0, ZeroDensity(), threshold=0)
    with pytest.raises(ValueError):
        ThresholdDetectionSpec(1.0, ZeroDensity(), threshold=1, window_rule="sliding")
    loud = ThresholdDetectionSpec(1.0, UniformDensity(-2, 2), threshold=1.0)
    with pytest.raises(ValueError, match="one quantum"):
        sample_threshold(loud, (0, 0), 100, 0)


def test_post_selection_biases_modulated_threshold():
    n = 200000
    cos2 = lambda theta, lam: np.abs(np.cos(2 * (lam - theta)))
    spec = ThresholdDetectionSpec(1.0, UniformDensity(-0.5, 0.5), threshold=0.9, modulation=cos2)
    settings = (0.0, deg(60))
    s = sample_threshold(spec, settings, n, seed=2)
    rec, discarded = post_select(s)
    assert discarded > 0
    # full ensemble: the polarization each arm would have reported had every arm clicked
    full = sample_threshold(ThresholdDetectionSpec(1.0, ZeroDensity(), threshold=1e-300), settings, n, seed=2)
    e_full = corr(full)
    e_post = (rec.n_pp - rec.n_pm - rec.n_mp + rec.n_mm) / rec.total
    assert abs(e_post - e_full) > 10 * math.sqrt(1 / rec.total)


# --- drift --------------------------------------------------------------------

BASE = ContextSpec((0.0, deg(60)), UNIFORM, sign_cos2)


def test_zero_perturbation_matches_repeated_sampling():
    runs = run_with_drift(RunDriftSpec(BASE, 3), 1000, seed=40)
    for r, s in enumerate(runs):
        assert s.identical(sample_context(BASE, 1000, 40 + r))


def test_single_run_is_sample_context():
    (only,) = run_with_drift(RunDriftSpec(BASE, 1), 5000, seed=3)
    assert only.identical(sample_context(BASE, 5000, 3))


def test_alternating_drift_pooled_differs_from_each_run():
    spec = RunDriftSpec(ContextSpec((0.0, deg(30)), UNIFORM, shared_sign), 4, alternating_drift(
        DiscreteDensity([1.0], [1.0]), DiscreteDensity([-1.0, 1.0], [0.75, 0.25])))
    runs = run_with_drift(spec, 20000, seed=0)
    records = [post_select(s)[0] for s in runs]
    pooled = pool_records(records)
    p_pool = pooled.n_pp / pooled.total
    # direct mixture arithmetic: even runs give P++ = 1, odd runs 0.25
    assert p_pool == pytest.approx((1 + 0.25) / 2, abs=0.01)
    for rec in records:
        assert abs(rec.n_pp / rec.total - p_pool) > 0.3
    with pytest.raises(ValueError):
        RunDriftSpec(BASE, 0)


# --- post_select ----------------------------------------------------------------

def test_post_select_full_detection():
    s = sample_from_table(singlet_pair_table(0, deg(60)), 5000, seed=0, settings=(0.0, deg(60)))
    rec, discarded = post_select(s)
    assert discarded == 0 and rec.total == 5000
    assert rec.n_pp == np.count_nonzero((s.a == 1) & (s.b == 1))
    assert rec.settings_deg == pytest.approx((0, 60))


def test_pool_records():
    r = pool_records([CoincidenceRecord(0, 1, 1, 2, 3, 4), CoincidenceRecord(0, 1, 1, 1, 1, 1)])
    assert r.counts == (2, 3, 4, 5)


@pytest.mark.parametrize("n", [10**4, 10**5, 10**6])
def test_convergence_binomial_rate(n):
    t = singlet_pair_table(0, deg(60))
    f = freqs(sample_from_table(t, n, seed=n))
    se = np.sqrt(np.array(t.p, float) * (1 - np.array(t.p, float)) / n)
    assert np.all(np.abs(f - np.array(t.p, float)) < 4 * se)
