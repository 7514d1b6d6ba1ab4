import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levylab.errors import DomainError, NumericalError
from levylab.special import QuadratureSpec, bessel_k, gamma_fn, log_bessel_k, log_gamma_fn


def k_half(s):
    return math.sqrt(math.pi / (2 * s)) * math.exp(-s)


def k_three_halves(s):
    return k_half(s) * (1 + 1 / s)


@pytest.mark.parametrize(
    "x, expected",
    [(0.5, math.sqrt(math.pi)), (1.0, 1.0), (-0.5, -2 * math.sqrt(math.pi)), (5.0, 24.0)],
)
def test_gamma_examples(x, expected):
    assert gamma_fn(x) == pytest.approx(expected, rel=1e-12)


def test_gamma_against_scipy_oracle(oracle):
    for x, ref in oracle["gamma"]:
        assert gamma_fn(x) == pytest.approx(ref, rel=1e-12), x


@pytest.mark.parametrize("x", [0, -1, -2, -7])
def test_gamma_poles(x):
    with pytest.raises(DomainError):
        gamma_fn(x)
    with pytest.raises(DomainError):
        log_gamma_fn(x)


@given(st.floats(min_value=0.05, max_value=25.0))
def test_gamma_recurrence(x):
    assert gamma_fn(x + 1) == pytest.approx(x * gamma_fn(x), rel=1e-12)


@given(st.floats(min_value=0.05, max_value=150.0))
def test_log_gamma_matches_gamma(x):
    if x < 30:
        assert log_gamma_fn(x) == pytest.approx(math.log(gamma_fn(x)), rel=1e-12, abs=1e-12)
    assert log_gamma_fn(x) == pytest.approx(math.lgamma(x), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize(
    "nu, s, expected",
    [
        (0.5, 1.0, math.sqrt(math.pi / 2) * math.exp(-1)),
        (0.5, 2.0, math.sqrt(math.pi) / 2 * math.exp(-2)),
        (1.5, 1.0, math.sqrt(math.pi / 2) * math.exp(-1) * 2),
    ],
)
def test_bessel_examples(nu, s, expected):
    assert bessel_k(nu, s) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("s", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_bessel_half_integer_closed_forms(s):
    q = QuadratureSpec()
    for nu, closed in ((0.5, k_half(s)), (1.5, k_three_halves(s))):
        assert abs(bessel_k(nu, s) - closed) <= max(q.abs_tol, q.rel_tol * closed)


def test_bessel_against_scipy_oracle(oracle):
    for nu, s, ref in oracle["bessel_k"]:
        assert bessel_k(nu, s) == pytest.approx(ref, rel=1e-10), (nu, s)


def test_bessel_vectorized_matches_scalar():
    s = np.array([0.01, 0.3, 1.0, 7.5, 40.0])
    vec = bessel_k(0.75, s)
    assert vec.shape == s.shape
    for si, vi in zip(s, vec):
        assert vi == pytest.approx(bessel_k(0.75, float(si)), rel=1e-12)


def test_log_bessel_beyond_float_range():
    # K_nu(s) ~ sqrt(pi/2s) e^-s underflows near s = 750
    val = log_bessel_k(0.5, 1000.0)
    assert val == pytest.approx(0.5 * math.log(math.pi / 2000.0) - 1000.0, rel=1e-12)


@given(st.floats(min_value=0.5, max_value=1.5), st.floats(min_value=0.1, max_value=5.0))
def test_bessel_recurrence(nu, s):
    lhs = bessel_k(nu + 1, s)
    # K is even in its order
    rhs = bessel_k(abs(nu - 1), s) + 2 * nu / s * bessel_k(nu, s)
    assert lhs == pytest.approx(rhs, rel=1e-8)


@given(st.floats(min_value=0.0, max_value=4.0), st.floats(min_value=1e-3, max_value=50.0))
def test_bessel_positive_and_decreasing(nu, s):
    a, b = bessel_k(nu, s), bessel_k(nu, s * 1.01)
    assert a > 0 and b > 0
    assert b < a


@pytest.mark.parametrize("s", [0.0, -1.0, float("nan")])
def test_bessel_domain(s):
    with pytest.raises(DomainError):
        bessel_k(0.5, s)


def test_bessel_negative_order():
    with pytest.raises(DomainError):
        bessel_k(-0.5, 1.0)


def test_bessel_nonconvergence_reports_residual():
    q = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-300, max_subdivisions=1)
    with pytest.raises(NumericalError) as info:
        bessel_k(0.5, 1.0, q)
    assert info.value.residual >= 0


@pytest.mark.parametrize("kw", [{"abs_tol": 0}, {"rel_tol": -1}, {"max_subdivisions": 0}])
def test_quadrature_spec_validation(kw):
    with pytest.raises(DomainError):
        QuadratureSpec(**kw)
