"""Lévy families: densities, exponents and truncated moment functionals.

All families are pure-jump with triplet (0, 0, Lambda) except Brownian
motion, whose triplet is (0, 1, 0).  Symmetric families are handled on the
positive half-line and doubled where the integrand is even.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NumericalError, UnsupportedFamilyError
from .special import gamma_fn, log_bessel_k, log_gamma_fn


class Kind(str, Enum):
    GAMMA = "gamma"
    STABLE_SUB = "stable-sub"
    TEMPERED_STABLE_SUB = "tss"
    SYMMETRIC_STABLE = "stable"
    TEMPERED_STABLE = "ts"
    MODIFIED_TEMPERED_STABLE = "mts"
    NIG = "nig"
    BROWNIAN = "brownian"
    # limit subordinator with density c/s on (0, 1]
    HARMONIC_CUTOFF = "harmonic"


# open interval of admissible alpha per kind
_ALPHA_RANGE = {
    Kind.STABLE_SUB: (0.0, 1.0),
    Kind.TEMPERED_STABLE_SUB: (0.0, 1.0),
    Kind.SYMMETRIC_STABLE: (0.0, 2.0),
    Kind.TEMPERED_STABLE: (0.0, 1.0),
    Kind.MODIFIED_TEMPERED_STABLE: (0.0, 1.0),
}

_SUBORDINATORS = {Kind.GAMMA, Kind.STABLE_SUB, Kind.TEMPERED_STABLE_SUB, Kind.HARMONIC_CUTOFF}
_SYMMETRIC = {Kind.SYMMETRIC_STABLE, Kind.TEMPERED_STABLE, Kind.MODIFIED_TEMPERED_STABLE, Kind.NIG}


@dataclass(frozen=True)
class ProcessFamily:
    kind: Kind
    alpha: float | None = None
    c: float | None = None

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in _ALPHA_RANGE:
            lo, hi = _ALPHA_RANGE[kind]
            if self.alpha is None or not lo < self.alpha < hi:
                raise DomainError(f"{kind.value} requires alpha in ({lo}, {hi}), got {self.alpha}")
            object.__setattr__(self, "alpha", float(self.alpha))
        elif self.alpha is not None:
            raise DomainError(f"{kind.value} takes no alpha")
        if kind is Kind.HARMONIC_CUTOFF:
            if self.c is None or not self.c > 0:
                raise DomainError("harmonic cutoff family requires c > 0")
            object.__setattr__(self, "c", float(self.c))
        elif self.c is not None:
            raise DomainError(f"{kind.value} takes no c")

    @property
    def is_subordinator(self) -> bool:
        return self.kind in _SUBORDINATORS

    @property
    def is_symmetric(self) -> bool:
        return self.kind in _SYMMETRIC

    @property
    def label(self) -> str:
        if self.alpha is not None:
            return f"{self.kind.value}(alpha={self.alpha:g})"
        if self.c is not None:
            return f"{self.kind.value}(c={self.c:g})"
        return self.kind.value


def family(name: str, alpha: float | None = None, c: float | None = None) -> ProcessFamily:
    """Build a family from its short name (``gamma``, ``tss``, ``nig``, ...)."""
    aliases = {"ss": "stable-sub", "s": "stable", "bm": "brownian"}
    try:
        kind = Kind(aliases.get(name.lower(), name.lower()))
    except ValueError:
        raise DomainError(f"unknown family {name!r}") from None
    return ProcessFamily(kind, alpha=alpha, c=c)


def gamma_process() -> ProcessFamily:
    return ProcessFamily(Kind.GAMMA)


def stable_sub(alpha: float) -> ProcessFamily:
    return ProcessFamily(Kind.STABLE_SUB, alpha)


def tss(alpha: float) -> ProcessFamily:
    return ProcessFamily(Kind.TEMPERED_STABLE_SUB, alpha)


def symmetric_stable(alpha: float) -> ProcessFamily:
    return ProcessFamily(Kind.SYMMETRIC_STABLE, alpha)


def tempered_stable(alpha: float) -> ProcessFamily:
    return ProcessFamily(Kind.TEMPERED_STABLE, alpha)


def mts(alpha: float) -> ProcessFamily:
    return ProcessFamily(Kind.MODIFIED_TEMPERED_STABLE, alpha)


def nig() -> ProcessFamily:
    return ProcessFamily(Kind.NIG)


def brownian() -> ProcessFamily:
    return ProcessFamily(Kind.BROWNIAN)


def harmonic_cutoff(c: float) -> ProcessFamily:
    return ProcessFamily(Kind.HARMONIC_CUTOFF, c=c)


@dataclass(frozen=True)
class LevyTriplet:
    b: float
    c: float
    family: ProcessFamily


def triplet(f: ProcessFamily) -> LevyTriplet:
    if f.kind is Kind.BROWNIAN:
        return LevyTriplet(0.0, 1.0, f)
    return LevyTriplet(0.0, 0.0, f)


# ---------------------------------------------------------------------------
# densities


def _require_jumps(f: ProcessFamily):
    if f.kind is Kind.BROWNIAN:
        raise UnsupportedFamilyError("Brownian motion has no Lévy measure")


def log_density_positive(f: ProcessFamily, s):
    """log of the Lévy density at s > 0 (array in, array out)."""
    _require_jumps(f)
    s = np.asarray(s, dtype=float)
    ls = np.log(s)
    a = f.alpha
    k = f.kind
    if k is Kind.GAMMA:
        return -s - ls
    if k is Kind.STABLE_SUB:
        return math.log(a) - log_gamma_fn(1.0 - a) - (1.0 + a) * ls
    if k is Kind.TEMPERED_STABLE_SUB:
        return -log_gamma_fn(1.0 - a) - s - (1.0 + a) * ls
    if k is Kind.SYMMETRIC_STABLE:
        return -(1.0 + a) * ls
    if k is Kind.TEMPERED_STABLE:
        return -s - (1.0 + a) * ls
    if k is Kind.MODIFIED_TEMPERED_STABLE:
        nu = a + 0.5
        return log_bessel_k(nu, s) - nu * ls - math.log(math.pi)
    if k is Kind.NIG:
        return log_bessel_k(1.0, s) - ls - math.log(math.pi)
    if k is Kind.HARMONIC_CUTOFF:
        return np.where(s <= 1.0, math.log(f.c) - ls, -np.inf)
    raise UnsupportedFamilyError(k)


def levy_density(f: ProcessFamily, s):
    """dLambda/ds at s != 0."""
    _require_jumps(f)
    arr = np.asarray(s, dtype=float)
    if np.any(arr == 0):
        raise DomainError("Lévy density is undefined at s = 0")
    if f.is_subordinator and np.any(arr < 0):
        raise DomainError(f"{f.label} is a subordinator; density supported on s > 0")
    out = np.exp(log_density_positive(f, np.abs(arr)))
    return float(out) if out.ndim == 0 else out


def _leading_power(f: ProcessFamily):
    """(C, beta) with density ~ C s^(-1-beta) as s -> 0+."""
    a = f.alpha
    k = f.kind
    if k is Kind.GAMMA:
        return 1.0, 0.0
    if k is Kind.STABLE_SUB:
        return a / gamma_fn(1.0 - a), a
    if k is Kind.TEMPERED_STABLE_SUB:
        return 1.0 / gamma_fn(1.0 - a), a
    if k in (Kind.SYMMETRIC_STABLE, Kind.TEMPERED_STABLE):
        return 1.0, a
    if k is Kind.MODIFIED_TEMPERED_STABLE:
        return gamma_fn(a + 0.5) * 2.0 ** (a - 0.5) / math.pi, 2.0 * a
    if k is Kind.NIG:
        return 1.0 / math.pi, 1.0
    if k is Kind.HARMONIC_CUTOFF:
        return f.c, 0.0
    raise UnsupportedFamilyError(k)


def _is_power_law(f: ProcessFamily) -> bool:
    return f.kind in (Kind.STABLE_SUB, Kind.SYMMETRIC_STABLE)


# beyond this the exponentially tempered densities carry < 1e-30 of any moment used here
_TEMPERED_CUTOFF = 80.0

# ---------------------------------------------------------------------------
# quadrature in v = log s

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def _composite_gl(fn, a: float, b: float, panels: int):
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    vals = fn(nodes).reshape(panels, -1)
    return float(np.sum((vals @ _GL_W) * half))


def integrate_log(fn, a: float, b: float, rel_tol=1e-12, abs_tol=1e-15, max_level=10):
    """Integrate ``fn(v)`` over [a, b] by panel-doubling composite Gauss-Legendre."""
    if b <= a:
        return 0.0
    panels = max(4, int(math.ceil((b - a) / 2.0)))
    prev = _composite_gl(fn, a, b, panels)
    for _ in range(max_level):
        panels *= 2
        cur = _composite_gl(fn, a, b, panels)
        if abs(cur - prev) <= max(abs_tol, rel_tol * abs(cur)):
            return cur
        prev = cur
    raise NumericalError("log-space quadrature did not converge", residual=abs(cur - prev))


def levy_moment(f: ProcessFamily, k: float, lo: float, hi: float = math.inf) -> float:
    """int_lo^hi s^k dLambda(s) over the positive half-line, 0 <= lo < hi <= inf."""
    _require_jumps(f)
    if lo < 0 or not hi > lo:
        raise DomainError(f"invalid moment range [{lo}, {hi}]")
    C, beta = _leading_power(f)
    if f.kind is Kind.HARMONIC_CUTOFF:
        hi = min(hi, 1.0)
        if hi <= lo:
            return 0.0

    tail = 0.0
    top = hi
    if math.isinf(hi):
        if _is_power_law(f):
            if k >= beta:
                raise DomainError(f"moment of order {k} diverges at infinity for {f.label}")
            top = max(lo, 1.0) * 1e3
            tail = C * top ** (k - beta) / (beta - k)
        else:
            top = max(_TEMPERED_CUTOFF, 2.0 * lo)

    head = 0.0
    if lo == 0:
        if k <= beta:
            raise DomainError(f"moment of order {k} diverges at 0 for {f.label}")
        p = k - beta
        v_top = min(math.log(top), 0.0)
        v_lo = v_top - 39.0 / p
        # below v_lo the leading power term is exact to far below rounding
        head = C * math.exp(p * v_lo) / p
    else:
        v_lo = math.log(lo)

    def fn(v):
        return np.exp(k * v + v + log_density_positive(f, np.exp(v)))

    return head + integrate_log(fn, v_lo, math.log(top)) + tail


def tail_mass(f: ProcessFamily, x: float) -> float:
    """Lambda((x, inf)) on the positive half-line."""
    if not x > 0:
        raise DomainError("tail mass needs x > 0")
    return levy_moment(f, 0.0, x)


# ---------------------------------------------------------------------------
# transforms


def laplace_exponent(f: ProcessFamily, u: float) -> float:
    """log E exp(-u X(1)) for the subordinator families with a closed form."""
    if u < 0:
        raise DomainError("Laplace exponent needs u >= 0")
    a = f.alpha
    if f.kind is Kind.GAMMA:
        return -math.log1p(u)
    if f.kind is Kind.STABLE_SUB:
        return -(u ** a)
    if f.kind is Kind.TEMPERED_STABLE_SUB:
        return (1.0 - (1.0 + u) ** a) / a
    raise UnsupportedFamilyError(f"no closed-form Laplace exponent for {f.label}")


def char_exponent(f: ProcessFamily, u: float) -> complex:
    """Psi(u) with E exp(iuX(t)) = exp(t Psi(u))."""
    u = float(u)
    a = f.alpha
    k = f.kind
    if k is Kind.GAMMA:
        return -cmath.log(1.0 - 1j * u)
    if k is Kind.STABLE_SUB:
        return -((-1j * u) ** a) if u != 0 else 0j
    if k is Kind.TEMPERED_STABLE_SUB:
        return (1.0 - (1.0 - 1j * u) ** a) / a
    if k is Kind.SYMMETRIC_STABLE:
        return complex(-abs(u) ** a)
    if k is Kind.TEMPERED_STABLE:
        val = gamma_fn(-a) * ((1.0 - 1j * u) ** a + (1.0 + 1j * u) ** a - 2.0)
        # the two powers are conjugate; drop rounding residue in Im
        return complex(val.real, 0.0)
    if k is Kind.MODIFIED_TEMPERED_STABLE:
        return complex(
            math.pi ** -0.5 * 2.0 ** (-a - 0.5) * gamma_fn(-a) * ((1.0 + u * u) ** a - 1.0)
        )
    if k is Kind.NIG:
        return complex(1.0 - math.sqrt(1.0 + u * u))
    if k is Kind.BROWNIAN:
        return complex(-0.5 * u * u)
    raise UnsupportedFamilyError(f"no closed-form characteristic exponent for {f.label}")


def laplace_exponent_quadrature(f: ProcessFamily, u: float) -> float:
    """int_0^inf (exp(-us) - 1) dLambda(s) by quadrature."""
    if not f.is_subordinator:
        raise UnsupportedFamilyError(f"{f.label} is not a subordinator")
    if u == 0:
        return 0.0
    C, beta = _leading_power(f)
    top = _TEMPERED_CUTOFF if not _is_power_law(f) else max(60.0 / u, 1.0)
    if f.kind is Kind.HARMONIC_CUTOFF:
        top = 1.0
    v_lo = min(math.log(top), 0.0) - 39.0 / (1.0 - beta)

    def fn(v):
        s = np.exp(v)
        return np.expm1(-u * s) * np.exp(v + log_density_positive(f, s))

    val = integrate_log(fn, v_lo, math.log(top))
    if _is_power_law(f):
        # exp(-us) < e^-60 beyond top
        val -= C * top ** (-beta) / beta
    return val


def char_exponent_quadrature(f: ProcessFamily, u: float) -> float:
    """int (cos(us) - 1) dLambda(s) over R for a symmetric family (real part of Psi)."""
    if not f.is_symmetric:
        raise UnsupportedFamilyError(f"{f.label} is not symmetric")
    if u == 0:
        return 0.0
    C, beta = _leading_power(f)
    top = _TEMPERED_CUTOFF if not _is_power_law(f) else max(1.0, 50.0 / abs(u))
    v_lo = min(math.log(top), 0.0) - 39.0 / (2.0 - beta)

    def fn(v):
        s = np.exp(v)
        # cos(us) - 1 = -2 sin^2(us/2), no cancellation near 0
        return -2.0 * np.sin(0.5 * u * s) ** 2 * np.exp(v + log_density_positive(f, s))

    val = integrate_log(fn, v_lo, math.log(top))
    if _is_power_law(f):
        osc, _ = integrate.quad(
            lambda s: C * s ** (-1.0 - beta), top, math.inf, weight="cos", wvar=abs(u),
            epsabs=1e-14, limlst=200,
        )
        val += osc - C * top ** (-beta) / beta
    return 2.0 * val


# ---------------------------------------------------------------------------
# truncated moments


def _check_eps(eps: float):
    if not 0 < eps <= 1:
        raise DomainError(f"eps must lie in (0, 1], got {eps}")


def mu_eps(f: ProcessFamily, eps: float) -> float:
    """Mean of the sum of jumps in (0, eps]: int_0^eps s dLambda(s)."""
    _check_eps(eps)
    if not f.is_subordinator:
        raise UnsupportedFamilyError(f"mu_eps is defined for subordinators, not {f.label}")
    a = f.alpha
    if f.kind is Kind.GAMMA:
        return -math.expm1(-eps)
    if f.kind is Kind.STABLE_SUB:
        return a * eps ** (1.0 - a) / (gamma_fn(1.0 - a) * (1.0 - a))
    if f.kind is Kind.TEMPERED_STABLE_SUB:
        return float(special.gammainc(1.0 - a, eps))
    if f.kind is Kind.HARMONIC_CUTOFF:
        return f.c * eps
    return levy_moment(f, 1.0, 0.0, eps)


def sigma2_eps(f: ProcessFamily, eps: float) -> float:
    """int_{|s| <= eps} s^2 dLambda(s)."""
    _check_eps(eps)
    _require_jumps(f)
    a = f.alpha
    k = f.kind
    if k is Kind.GAMMA:
        return float(special.gammainc(2.0, eps))
    if k is Kind.STABLE_SUB:
        return a * eps ** (2.0 - a) / (gamma_fn(1.0 - a) * (2.0 - a))
    if k is Kind.TEMPERED_STABLE_SUB:
        return (1.0 - a) * float(special.gammainc(2.0 - a, eps))
    if k is Kind.SYMMETRIC_STABLE:
        return 2.0 * eps ** (2.0 - a) / (2.0 - a)
    if k is Kind.TEMPERED_STABLE:
        return 2.0 * gamma_fn(2.0 - a) * float(special.gammainc(2.0 - a, eps))
    if k is Kind.HARMONIC_CUTOFF:
        return 0.5 * f.c * eps * eps
    return 2.0 * levy_moment(f, 2.0, 0.0, eps)


def sigma_eps(f: ProcessFamily, eps: float) -> float:
    """Standard deviation of the compensated small-jump part at time 1."""
    return math.sqrt(sigma2_eps(f, eps))


def abs_moment(f: ProcessFamily, k: float, lo: float, hi: float = math.inf) -> float:
    """int_{lo <= |s| <= hi} |s|^k dLambda(s), both half-lines."""
    one_side = levy_moment(f, k, lo, hi)
    return one_side if f.is_subordinator else 2.0 * one_side


def b_eps(f: ProcessFamily, eps: float) -> float:
    """Drift of the renormalized compensated process w.r.t. truncation at 1."""
    sigma = sigma_eps(f, eps)
    lo = min(sigma, eps)
    if f.is_symmetric or lo >= eps:
        return 0.0
    return -levy_moment(f, 1.0, lo, eps) / sigma


def _clip_to_eps(f, eps, lo, hi):
    """Positive-side pieces of sigma*B ∩ (-eps, eps) as (lo, hi) magnitude ranges."""
    sigma = sigma_eps(f, eps)
    pieces = []
    for a, b, sign in ((lo, hi, 1.0), (-hi, -lo, -1.0)):
        # B ∩ (0, inf) for sign +, mirrored part of B ∩ (-inf, 0) for sign -
        a, b = max(a, 0.0), b
        if b <= a:
            continue
        if sign < 0 and f.is_subordinator:
            continue
        m_lo, m_hi = sigma * a, min(sigma * b, eps)
        if m_hi > m_lo:
            pieces.append((m_lo, m_hi))
    return sigma, pieces


def renormalized_levy_measure_mass(f: ProcessFamily, eps: float, interval) -> float:
    """Mass of the renormalized Lévy measure on B: Lambda(sigma(eps) B ∩ (-eps, eps))."""
    lo, hi = map(float, interval)
    if not hi > lo:
        raise DomainError("interval must satisfy lo < hi")
    if lo <= 0 <= hi:
        raise DomainError("interval must stay away from 0")
    _, pieces = _clip_to_eps(f, eps, lo, hi)
    return sum(levy_moment(f, 0.0, a, b) for a, b in pieces)


def renormalized_levy_density(f: ProcessFamily, eps: float, s):
    """Density of the renormalized Lévy measure: sigma * rho(sigma s) on |s| < eps/sigma."""
    sigma = sigma_eps(f, eps)
    s = np.asarray(s, dtype=float)
    inside = np.abs(sigma * s) < eps
    if f.is_subordinator:
        inside &= s > 0
    out = np.zeros_like(s)
    out[inside] = sigma * np.exp(log_density_positive(f, np.abs(sigma * s[inside])))
    return out


def renormalized_abs_moment(f: ProcessFamily, eps: float, k: float, lo: float, hi: float) -> float:
    """int_{lo <= |s| <= hi} |s|^k dLambda~_eps(s), integrating the renormalized density."""
    if not 0 < lo < hi:
        raise DomainError("need 0 < lo < hi")
    sigma = sigma_eps(f, eps)
    hi = min(hi, eps / sigma)
    if hi <= lo:
        return 0.0

    def fn(v):
        s = np.exp(v)
        return s ** (k + 1.0) * renormalized_levy_density(f, eps, s)

    one_side = integrate_log(fn, math.log(lo), math.log(hi))
    return one_side if f.is_subordinator else 2.0 * one_side
