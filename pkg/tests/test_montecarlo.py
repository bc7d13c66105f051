import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from occucert import catalog
from occucert.barrier import BarrierCertificate, Kind, PiecewiseBarrier
from occucert.bounds import BoundResult, certified_bound, make_query
from occucert.montecarlo import (
    BLOCK,
    EmpiricalEstimate,
    clopper_pearson,
    estimate_occupation_probability,
    martingale_diagnostic,
    occupation_counts,
    sample_mode_sequences,
    sample_paths,
    validate_bounds,
)
from occucert.switched import constrained_occupation_count, occupation_count


def test_deterministic_across_runs_and_workers(ex2):
    a = estimate_occupation_probability(ex2, 20, [5, 10, 15], 3 * BLOCK + 17, seed=9)
    b = estimate_occupation_probability(ex2, 20, [5, 10, 15], 3 * BLOCK + 17, seed=9, workers=4)
    assert a == b
    c = estimate_occupation_probability(ex2, 20, [5, 10, 15], 3 * BLOCK + 17, seed=10)
    assert a != c


def test_vectorised_simulator_matches_scalar_traces(ex2, leaky):
    for spec in (ex2, leaky):
        modes = sample_mode_sequences(spec, 15, 300, seed=5)
        counts = occupation_counts(spec, 15, 300, seed=5)
        paths = sample_paths(spec, 15, 300, seed=5)
        for i in range(300):
            tr = occupation_count(spec, spec.x0, list(modes[i]))
            assert tr.count == counts[i]
            assert np.array_equal(np.array(tr.states), paths[i])


def test_switched_and_constrained_estimates_agree_pathwise(leaky, ex1, ex2):
    for spec in (leaky, ex1, ex2):
        s = occupation_counts(spec, 25, 10_000, seed=1, semantics="switched")
        c = occupation_counts(spec, 25, 10_000, seed=1, semantics="constrained")
        assert np.array_equal(s, c)


def test_prefix_consistency_and_monotone_estimates(ex2):
    short = occupation_counts(ex2, 10, 5000, seed=3)
    long = occupation_counts(ex2, 20, 5000, seed=3)
    assert np.all(long >= short)
    fewer = occupation_counts(ex2, 20, 1000, seed=3)
    assert np.array_equal(fewer, long[:1000])
    ests = estimate_occupation_probability(ex2, 20, list(range(1, 22)), 5000, seed=3)
    p = [e.p_hat for e in ests]
    assert all(a >= b for a, b in zip(p, p[1:]))
    for k in (3, 8):
        by_n = [estimate_occupation_probability(ex2, n, [k], 5000, seed=3)[0].p_hat for n in (k, 2 * k, 4 * k)]
        assert by_n == sorted(by_n)


def test_estimate_invariants(ex2):
    for e in estimate_occupation_probability(ex2, 12, [1, 5, 13], 2000, seed=0):
        assert e.p_hat == e.successes / e.samples
        assert 0 <= e.ci_lo <= e.p_hat <= e.ci_hi <= 1


def test_estimate_rejects_bad_k(ex2):
    with pytest.raises(ValueError):
        estimate_occupation_probability(ex2, 5, [7], 10, seed=0)
    with pytest.raises(ValueError):
        estimate_occupation_probability(ex2, 5, [0], 10, seed=0)


def test_clopper_pearson_boundaries():
    lo, hi = clopper_pearson(0, 100_000, 0.99)
    assert lo == 0.0 and hi == pytest.approx(1 - 0.01 ** (1 / 100_000), rel=1e-9)
    lo, hi = clopper_pearson(50, 50, 0.99)
    assert hi == 1.0 and lo == pytest.approx(0.01 ** (1 / 50), rel=1e-9)
    with pytest.raises(ValueError):
        clopper_pearson(5, 3)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 500), st.data())
def test_clopper_pearson_matches_scipy(n, data):
    k = data.draw(st.integers(1, max(1, n - 1)))
    if k >= n:
        return
    lo, hi = clopper_pearson(k, n, 0.95)
    ci = stats.binomtest(k, n).proportion_ci(confidence_level=0.95, method="exact")
    assert lo == pytest.approx(ci.low, rel=1e-9) and hi == pytest.approx(ci.high, rel=1e-9)


def _bound(side, n, k, value):
    return BoundResult(side, n, k, value, value, True)


def test_validate_examples():
    est = EmpiricalEstimate(20, 5, 99_000, 100_000, 0.99, 0.988, 0.992)
    rep = validate_bounds([est], [_bound("lower", 20, 5, 0.93)])
    assert rep.passed and rep.comparisons[0].margin == pytest.approx(0.06)
    est = EmpiricalEstimate(20, 5, 50_000, 100_000, 0.5, 0.496, 0.504)
    rep = validate_bounds([est], [_bound("upper", 20, 5, 0.1)])
    assert not rep.passed and rep.comparisons[0].status == "fail"
    rep = validate_bounds([est], [_bound("lower", 20, 5, 0.0)])
    assert rep.passed


def test_validate_skips_invalid_and_rejects_misaligned():
    est = EmpiricalEstimate(20, 5, 1, 10, 0.1, 0.0, 0.5)
    bad = BoundResult("lower", 20, 5, None, None, False, "nope")
    rep = validate_bounds([est], [bad])
    assert rep.passed and rep.skipped == 1
    with pytest.raises(ValueError):
        validate_bounds([est], [_bound("lower", 20, 6, 0.1)])
    with pytest.raises(ValueError):
        validate_bounds([est], [])


def test_sandwich_on_examples():
    for name in catalog.EXAMPLE_NAMES:
        cfg = catalog.build_example(name)
        for n in (h for h in cfg.horizons if h != float("inf")):
            ks = [k for k in cfg.visit_counts if k <= n + 1]
            ests = estimate_occupation_probability(cfg.spec, int(n), ks, 20_000, seed=42)
            bounds = [certified_bound(make_query(cfg.spec, cfg.certificate, n, k)) for k in ks]
            assert validate_bounds(ests, bounds).passed, (name, n)


def test_zero_barrier_has_exactly_zero_drift(ex2):
    cert = BarrierCertificate(PiecewiseBarrier.single([0.0], -1, 1), Kind.ATTRACTIVE, 1.5, 0.0)
    d = martingale_diagnostic(ex2, cert, 0.5, 10, 500, seed=0)
    assert d.empirical_drift == (0.0,) * 10 and d.ci_halfwidth == (0.0,) * 10
    assert d.direction == "submartingale" and d.violations() == []


@pytest.mark.parametrize("name", catalog.EXAMPLE_NAMES)
def test_drift_direction_on_examples(name):
    cfg = catalog.build_example(name)
    d = martingale_diagnostic(cfg.spec, cfg.certificate, cfg.spec.x0, 20, 10_000, seed=42)
    assert len(d.times) == len(d.empirical_drift) == len(d.ci_halfwidth) == 20
    assert len(d.violations()) <= 0.01 * len(d.times)


def test_drift_flags_a_refuted_certificate(ex2):
    # alpha = 1.2 breaks the attractive drift inequality in the band
    cert = BarrierCertificate(catalog.step_barrier(), Kind.ATTRACTIVE, 1.2, 0.0)
    d = martingale_diagnostic(ex2, cert, 0.5, 5, 4000, seed=1)
    assert d.empirical_drift[0] < -d.ci_halfwidth[0]
