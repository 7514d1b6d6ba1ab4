import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levylab import models as m
from levylab.diagnostics import empirical_cf, empirical_laplace, ks_critical_value, ks_two_sample
from levylab.errors import AcceptanceRateError, DomainError, UnsupportedFamilyError
from levylab.samplers import (
    JumpTable,
    PathGrid,
    RngStream,
    default_delta,
    sample_brownian,
    sample_compensated_small_jumps,
    sample_family,
    sample_gamma,
    sample_mts,
    sample_nig,
    sample_small_jump_sub,
    sample_stable_sub,
    sample_tss,
)

N = 100_000
SEED = 8128


def rng(*keys):
    return RngStream(SEED).child(*keys)


def skew_se(x):
    """Sample skewness with a plug-in standard error (valid for heavy tails)."""
    z = (x - x.mean()) / x.std()
    return float(np.mean(z**3)), float(np.std(z**3) / math.sqrt(x.size))


# ---------------------------------------------------------------------------
# grid and streams


def test_grid():
    g = PathGrid(4)
    np.testing.assert_array_equal(g.times, [0, 0.25, 0.5, 0.75, 1.0])
    assert g.dt == 0.25
    with pytest.raises(DomainError):
        PathGrid(0)


def test_stream_bounds():
    with pytest.raises(DomainError):
        RngStream(-1)
    with pytest.raises(DomainError):
        RngStream(0, 2**64)


@given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1))
def test_stream_reproducible(seed, sid):
    a = RngStream(seed, sid).generator().random(4)
    b = RngStream(seed, sid).generator().random(4)
    np.testing.assert_array_equal(a, b)


def test_distinct_streams_differ_and_are_uncorrelated():
    base = RngStream(1)
    a = base.child("x", 0).generator().standard_normal(N)
    b = base.child("x", 1).generator().standard_normal(N)
    assert not np.array_equal(a, b)
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / math.sqrt(N)


@pytest.mark.parametrize("f", [m.gamma_process(), m.stable_sub(0.5), m.tss(0.4), m.nig(), m.mts(0.3), m.brownian()],
                         ids=lambda f: f.label)
def test_paths_reproducible_and_start_at_zero(f):
    g = PathGrid(8)
    a = sample_family(f, g, rng("repro"), 50)
    b = sample_family(f, g, rng("repro"), 50)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.values.shape == (50, 9)
    assert np.all(a.values[:, 0] == 0)


def test_sample_family_unsupported():
    with pytest.raises(UnsupportedFamilyError):
        sample_family(m.symmetric_stable(1.0), PathGrid(2), rng(), 1)


# ---------------------------------------------------------------------------
# exact samplers


def test_gamma_moments():
    x = sample_gamma(PathGrid(16), rng("gamma"), N).terminal
    assert abs(x.mean() - 1) <= 4 / math.sqrt(N)
    est = empirical_laplace(x, 1.0)
    assert abs(est.value - 0.5) <= 3 * est.stderr


def test_gamma_single_step():
    p = sample_gamma(PathGrid(1), rng("g1"), 10)
    assert p.values.shape == (10, 2)
    direct = rng("g1").generator().standard_gamma(1.0, size=(10, 1))
    np.testing.assert_array_equal(p.values[:, 1], direct[:, 0])


@pytest.mark.parametrize("alpha, u", [(0.5, 1.0), (0.7, 2.0)])
def test_stable_sub_laplace(alpha, u):
    x = sample_stable_sub(alpha, PathGrid(16), rng("ss", alpha), N).terminal
    est = empirical_laplace(x, u)
    assert abs(est.value - math.exp(-(u**alpha))) <= 3 * est.stderr


def test_tss_laplace():
    x = sample_tss(0.5, PathGrid(16), rng("tss"), N).terminal
    est = empirical_laplace(x, 1.0)
    assert abs(est.value - math.exp(2 - 2 * math.sqrt(2))) <= 3 * est.stderr


def test_tss_acceptance_rate():
    p = sample_tss(0.5, PathGrid(100), rng("acc"), 1000)
    rate, n = p.meta["acceptance_rate"], p.meta["proposals"]
    expected = math.exp(-0.02)
    assert abs(rate - expected) <= 3 * math.sqrt(expected * (1 - expected) / n)


def test_tss_acceptance_floor():
    with pytest.raises(AcceptanceRateError, match="n_steps"):
        sample_tss(0.05, PathGrid(2), rng(), 1)


@pytest.mark.parametrize("f", [m.gamma_process(), m.stable_sub(0.3), m.tss(0.2), m.tss(0.7)], ids=lambda f: f.label)
def test_subordinator_paths_monotone(f):
    p = sample_family(f, PathGrid(32), rng("mono"), 2000)
    assert np.all(np.diff(p.values, axis=1) >= 0)


def test_nig_cf_and_symmetry():
    x = sample_nig(PathGrid(16), rng("nig"), N).terminal
    est = empirical_cf(x, 1.0)
    assert abs(est.value.real - math.exp(1 - math.sqrt(2))) <= 3 * est.stderr_real
    assert abs(est.value.imag) <= 3 * est.stderr_imag
    assert abs(x.mean()) <= 3 * x.std() / math.sqrt(N)
    sk, se = skew_se(x)
    assert abs(sk) <= 4 * se


def test_brownian_moments():
    p = sample_brownian(PathGrid(16), rng("bm"), N)
    x = p.terminal
    assert abs(x.mean()) <= 3 / math.sqrt(N)
    assert abs(x.var() - 1) <= 3 * math.sqrt(2 / N)
    inc = p.increments
    lag = np.mean(inc[:, 1:] * inc[:, :-1]) / inc.var()
    assert abs(lag) <= 4 / math.sqrt(inc[:, 1:].size)


@pytest.mark.parametrize(
    "f, u",
    [(f, u) for f in (m.gamma_process(), m.stable_sub(0.3), m.tss(0.1), m.tss(0.3)) for u in (0.5, 1.0, 2.0)],
    ids=lambda v: v.label if hasattr(v, "label") else f"u={v}",
)
def test_subordinator_transforms_within_3se(f, u):
    x = sample_family(f, PathGrid(16), rng("tf", f.label), N).terminal
    est = empirical_laplace(x, u)
    assert abs(est.value - math.exp(m.laplace_exponent(f, u))) <= 3 * est.stderr


@pytest.mark.parametrize("f", [m.gamma_process(), m.stable_sub(0.5)], ids=lambda f: f.label)
def test_grid_refinement_law(f):
    a = sample_family(f, PathGrid(1), rng("ref", 1), 10_000).terminal
    b = sample_family(f, PathGrid(256), rng("ref", 256), 10_000).terminal
    assert ks_two_sample(a, b).statistic < ks_critical_value(10_000, 10_000, 0.01)


# ---------------------------------------------------------------------------
# MTS


def test_mts_cf():
    x = sample_mts(0.3, PathGrid(16), rng("mts"), N, eps_cut=1e-3).terminal
    est = empirical_cf(x, 1.0)
    target = math.exp(m.char_exponent(m.mts(0.3), 1.0).real)
    assert abs(est.value.real - target) <= 3 * est.stderr_real + 1e-3


def test_mts_jump_count():
    p = sample_mts(0.3, PathGrid(8), rng("mtsn"), 20_000, eps_cut=1e-3)
    rate = 2 * m.levy_moment(m.mts(0.3), 0.0, 1e-3)
    counts = p.meta["n_jumps"]
    assert p.meta["jump_rate"] == pytest.approx(rate, rel=1e-8)
    assert abs(counts.mean() - rate) <= 3 * counts.std() / math.sqrt(counts.size)


def test_mts_symmetric():
    x = sample_mts(0.3, PathGrid(4), rng("mtss"), N).increments.ravel()
    sk, se = skew_se(x)
    assert abs(sk) <= 4 * se


def test_mts_domain():
    with pytest.raises(DomainError):
        sample_mts(0.5, PathGrid(2), rng(), 1)
    with pytest.raises(DomainError):
        sample_mts(0.3, PathGrid(2), rng(), 1, eps_cut=0.0)


# ---------------------------------------------------------------------------
# jump tables and small jumps


@pytest.mark.parametrize("f", [m.nig(), m.mts(0.25), m.stable_sub(0.5), m.gamma_process()], ids=lambda f: f.label)
def test_jump_table_inverse_cdf(f):
    lo, hi = 1e-4, 0.1
    t = JumpTable(f, lo, hi)
    x = t.sample(rng("jt").generator(), 50_000)
    assert x.min() >= lo and x.max() <= hi
    # empirical fraction below the geometric midpoint against quadrature
    mid = math.sqrt(lo * hi)
    p = m.levy_moment(f, 0.0, lo, mid) / t.total
    frac = np.mean(x < mid)
    assert abs(frac - p) <= 4 * math.sqrt(p * (1 - p) / x.size)


def test_jump_table_rejects_untempered_infinite_range():
    with pytest.raises(UnsupportedFamilyError):
        JumpTable(m.stable_sub(0.5), 0.1)


def test_small_jump_mean_gamma():
    p = sample_small_jump_sub(m.gamma_process(), 0.1, PathGrid(8), rng("sj"), delta=1e-6, n_paths=N)
    x = p.terminal
    assert abs(x.mean() - m.mu_eps(m.gamma_process(), 0.1)) <= 3 * x.std() / math.sqrt(N)
    assert np.all(np.diff(p.values, axis=1) >= 0)
    assert np.all(p.max_jump < 0.1)


def test_small_jump_zero_case():
    # with delta just below eps no jumps fall in [delta, eps)
    f = m.gamma_process()
    eps = 0.1
    delta = eps * (1 - 1e-12)
    p = sample_small_jump_sub(f, eps, PathGrid(4), rng("zero"), delta=delta, n_paths=5)
    drift = m.mu_eps(f, delta)
    np.testing.assert_allclose(p.values, np.tile(drift * PathGrid(4).times, (5, 1)), rtol=1e-12)


def test_small_jump_variance_stable():
    f = m.stable_sub(0.5)
    eps, delta = 0.01, 1e-5
    x = sample_small_jump_sub(f, eps, PathGrid(4), rng("sjv"), delta=delta, n_paths=N).terminal
    target = m.sigma2_eps(f, eps) - m.sigma2_eps(f, delta)
    d = x - x.mean()
    se = math.sqrt((np.mean(d**4) - x.var() ** 2) / N)
    assert abs(x.var() - target) <= 3 * se


def test_small_jump_domain():
    with pytest.raises(DomainError):
        sample_small_jump_sub(m.gamma_process(), 0.1, PathGrid(2), rng(), delta=0.1)
    with pytest.raises(UnsupportedFamilyError):
        sample_small_jump_sub(m.nig(), 0.1, PathGrid(2), rng())
    with pytest.raises(DomainError):
        sample_compensated_small_jumps(m.nig(), 0.1, PathGrid(2), rng(), delta=0.2)


def test_compensated_nig_mean_variance_and_bound():
    f = m.nig()
    eps, n = 0.01, 1000
    # about 6e4 jumps per path at delta = 1e-5
    p = sample_compensated_small_jumps(f, eps, PathGrid(8), rng("comp"), delta=1e-5, n_paths=n)
    x = p.terminal
    assert abs(x.mean()) <= 3 * x.std() / math.sqrt(n)
    d = x - x.mean()
    se = math.sqrt((np.mean(d**4) - x.var() ** 2) / n)
    assert abs(x.var() - m.sigma2_eps(f, eps)) <= 3 * se
    assert np.all(p.max_jump < eps)


def test_compensated_subordinator_is_centred():
    f = m.gamma_process()
    x = sample_compensated_small_jumps(f, 0.1, PathGrid(8), rng("compg"), n_paths=N).terminal
    assert abs(x.mean()) <= 3 * x.std() / math.sqrt(N)


def test_default_delta_respects_budget():
    for f in (m.nig(), m.stable_sub(0.5), m.mts(0.25)):
        for eps in (0.1, 1e-3):
            d = default_delta(f, eps)
            assert eps * 1e-3 <= d < eps
            assert m.abs_moment(f, 0.0, d, eps) <= 2000 * (1 + 1e-6)
