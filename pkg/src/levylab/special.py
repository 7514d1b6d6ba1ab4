"""Gamma function and the modified Bessel function of the second kind.

``bessel_k`` evaluates the integral representation

    K_nu(s) = 1/2 (s/2)^nu  int_0^inf exp(-t - s^2/(4t)) t^(-nu-1) dt

after the substitution t = e^u.  In u the integrand decays doubly
exponentially on both sides of its peak, so a truncated trapezoidal rule
converges geometrically in the number of nodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 12

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if int(self.max_subdivisions) < 1:
            raise DomainError("max_subdivisions must be >= 1")


DEFAULT_QUADRATURE = QuadratureSpec()

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_pole(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma_fn(x: float) -> float:
    """Gamma function for real ``x`` away from the poles 0, -1, -2, ..."""
    x = float(x)
    if _is_pole(x):
        raise DomainError(f"gamma_fn has a pole at x={x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    # t**(z+0.5) overflows long before the result does for large x
    return math.sqrt(2.0 * math.pi) * math.exp((z + 0.5) * math.log(t) - t) * acc


def log_gamma_fn(x: float) -> float:
    """log |Gamma(x)|."""
    x = float(x)
    if _is_pole(x):
        raise DomainError(f"log_gamma_fn has a pole at x={x}")
    if x < 0.5:
        return math.log(math.pi / abs(math.sin(math.pi * x))) - log_gamma_fn(1.0 - x)
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (z + 0.5) * math.log(t) - t + math.log(acc)


def _phi(u, nu, s2q):
    # log of the integrand in u = log t, with s2q = s^2/4
    return -np.exp(u) - s2q * np.exp(-u) - nu * u


# integrand is cut where it falls this far (in log) below its peak
_LOG_DROP = 50.0


def _integration_window(nu, s2q):
    t_star = s2q * 2.0 / (nu + np.sqrt(nu * nu + 4.0 * s2q))
    u_star = np.log(t_star)
    phi_star = _phi(u_star, nu, s2q)
    target = phi_star - _LOG_DROP

    def edge(direction):
        step = np.ones_like(u_star)
        for _ in range(200):
            below = _phi(u_star + direction * step, nu, s2q) <= target
            if below.all():
                break
            step = np.where(below, step, 2.0 * step)
        lo, hi = np.zeros_like(step), step
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            below = _phi(u_star + direction * mid, nu, s2q) <= target
            hi = np.where(below, mid, hi)
            lo = np.where(below, lo, mid)
        return u_star + direction * hi

    return edge(-1.0), edge(1.0), phi_star


def _log_bessel_k(nu: float, s: np.ndarray, q: QuadratureSpec) -> np.ndarray:
    s2q = 0.25 * s * s
    u_lo, u_hi, phi_star = _integration_window(nu, s2q)
    width = (u_hi - u_lo)[:, None]

    n = 32
    grid = np.linspace(0.0, 1.0, n + 1)[None, :]
    vals = np.exp(_phi(u_lo[:, None] + width * grid, nu, s2q[:, None]) - phi_star[:, None])
    total = vals.sum(axis=1) - 0.5 * (vals[:, 0] + vals[:, -1])
    trap = total * width[:, 0] / n
    log_pref = math.log(0.5) + nu * np.log(0.5 * s) + phi_star

    for _ in range(int(q.max_subdivisions)):
        mids = (np.arange(n) + 0.5)[None, :] / n
        new = np.exp(_phi(u_lo[:, None] + width * mids, nu, s2q[:, None]) - phi_star[:, None])
        total = total + new.sum(axis=1)
        n *= 2
        refined = total * width[:, 0] / n
        scale = np.exp(log_pref)
        err = np.abs(refined - trap) * scale
        ok = err <= np.maximum(q.abs_tol, q.rel_tol * refined * scale)
        trap = refined
        if ok.all():
            return log_pref + np.log(trap)
    raise NumericalError(
        f"bessel_k(nu={nu}) did not converge in {q.max_subdivisions} refinements",
        residual=float(err.max()),
    )


def bessel_k(nu: float, s, q: QuadratureSpec = DEFAULT_QUADRATURE):
    """Modified Bessel function of the second kind K_nu(s), nu >= 0, s > 0.

    Accepts a scalar or an array for ``s``; the result has the same shape.
    Values below the float64 range underflow to 0.
    """
    return np.exp(log_bessel_k(nu, s, q))


def log_bessel_k(nu: float, s, q: QuadratureSpec = DEFAULT_QUADRATURE):
    """log K_nu(s); stays finite where K_nu itself under- or overflows."""
    nu = float(nu)
    if nu < 0:
        raise DomainError("bessel_k requires nu >= 0")
    arr = np.asarray(s, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("bessel_k requires s > 0")
    flat = np.atleast_1d(arr).ravel()
    # chunked so the refinement arrays stay bounded
    out = np.concatenate(
        [_log_bessel_k(nu, flat[i:i + 2048], q) for i in range(0, flat.size, 2048)]
    ).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out
