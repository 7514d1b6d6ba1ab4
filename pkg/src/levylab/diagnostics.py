"""Empirical transforms, two-sample distances, UT certificates and convergence curves."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy import special

from . import models
from .errors import CertificateFailure, DomainError
from .renormalization import renormalize_compensated, renormalize_sub
from .samplers import (
    PathGrid,
    RngStream,
    sample_brownian,
    sample_gamma,
    sample_mts,
    sample_nig,
    sample_tss,
)

DIAGNOSTIC_COLUMNS = ("param", "statistic", "value", "stderr", "n", "seed")
DEFAULT_U_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)
FDD_TIMES = (0.25, 0.5, 0.75, 1.0)


@dataclass
class DiagnosticRow:
    param: float
    statistic: str
    value: float
    stderr: float | None = None
    n: int = 1
    seed: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n_samples must be >= 1")
        if self.stderr is not None and self.stderr < 0:
            raise DomainError("stderr must be non-negative")


@dataclass
class DiagnosticsReport:
    label: str
    seed: int | None = None
    rows: list[DiagnosticRow] = field(default_factory=list)

    def add(self, param, statistic, value, stderr=None, n=1):
        self.rows.append(
            DiagnosticRow(float(param), statistic, float(value),
                          None if stderr is None else float(stderr), int(n), self.seed)
        )

    def values(self, statistic: str) -> list[float]:
        return [r.value for r in self.rows if r.statistic == statistic]

    def params(self, statistic: str) -> list[float]:
        return [r.param for r in self.rows if r.statistic == statistic]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(DIAGNOSTIC_COLUMNS)
        for r in self.rows:
            w.writerow([repr(r.param), r.statistic, repr(r.value),
                        "" if r.stderr is None else repr(r.stderr), r.n,
                        "" if r.seed is None else r.seed])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "seed": self.seed,
            "rows": [
                {"param": r.param, "statistic": r.statistic, "value": r.value,
                 "stderr": r.stderr, "n": r.n, "seed": r.seed}
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# empirical transforms


class Estimate(NamedTuple):
    value: float
    stderr: float


class CfEstimate(NamedTuple):
    value: complex
    stderr_real: float
    stderr_imag: float


def _nonempty(samples):
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("empty sample")
    return x


def empirical_cf(samples, u: float) -> CfEstimate:
    """Sample mean of exp(iuX) with componentwise standard errors."""
    x = _nonempty(samples)
    n = x.size
    # evaluate at |u| so that phi(-u) is exactly conj(phi(u))
    ux = abs(u) * x
    c, s = np.cos(ux), np.sin(ux)
    sign = -1.0 if u < 0 else 1.0
    re, im = c.mean(), sign * s.mean()
    return CfEstimate(complex(re, im), float(c.std() / math.sqrt(n)), float(s.std() / math.sqrt(n)))


def empirical_laplace(samples, u: float) -> Estimate:
    """Sample mean of exp(-uX) for non-negative samples."""
    x = _nonempty(samples)
    if np.any(x < 0):
        raise DomainError("Laplace transform needs non-negative samples")
    if u < 0:
        raise DomainError("u must be >= 0")
    e = np.exp(-u * x)
    return Estimate(float(e.mean()), float(e.std() / math.sqrt(x.size)))


def cf_distance(samples, target, u_grid=DEFAULT_U_GRID) -> Estimate:
    """max_u |phi_hat(u) - target(u)|, with the standard error at the maximizing u."""
    best, best_se = -1.0, 0.0
    for u in u_grid:
        est = empirical_cf(samples, u)
        d = abs(est.value - target(u))
        if d > best:
            best, best_se = d, math.hypot(est.stderr_real, est.stderr_imag)
    return Estimate(best, best_se)


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov


class KsResult(NamedTuple):
    statistic: float
    pvalue: float


def ks_two_sample(a, b) -> KsResult:
    """Sup distance between the two empirical CDFs, with the asymptotic p-value."""
    a = np.sort(_nonempty(a))
    b = np.sort(_nonempty(b))
    both = np.concatenate([a, b])
    fa = np.searchsorted(a, both, side="right") / a.size
    fb = np.searchsorted(b, both, side="right") / b.size
    d = float(np.max(np.abs(fa - fb)))
    en = math.sqrt(a.size * b.size / (a.size + b.size))
    return KsResult(d, float(special.kolmogorov(en * d)))


def ks_one_sample(a, cdf) -> KsResult:
    """Sup distance between the empirical CDF of ``a`` and a continuous ``cdf``."""
    a = np.sort(_nonempty(a))
    n = a.size
    f = cdf(a)
    d = float(max(np.max(np.arange(1, n + 1) / n - f), np.max(f - np.arange(n) / n)))
    return KsResult(d, float(special.kolmogorov(math.sqrt(n) * d)))


def ks_critical_value(n: int, m: int, level: float = 0.01) -> float:
    """Asymptotic two-sample critical value c(level) sqrt((n+m)/(nm))."""
    c = float(special.kolmogi(level))
    return c * math.sqrt((n + m) / (n * m))


def normal_cdf(x):
    return 0.5 * special.erfc(-np.asarray(x) / math.sqrt(2.0))


# ---------------------------------------------------------------------------
# transform consistency


def transform_consistency(f: models.ProcessFamily, u_grid=(0.5, 1.0, 2.0), tol=1e-6) -> DiagnosticsReport:
    """Closed-form exponent against the quadrature of its Lévy integral.

    Rows: closed form, quadrature, absolute gap, ratio.  A ratio that is
    constant in u but not 1 flags a normalization mismatch between the
    density and the closed form; it is reported, never corrected.
    """
    rep = DiagnosticsReport(f"transform-consistency {f.label}")
    for u in u_grid:
        if f.is_subordinator:
            closed = models.laplace_exponent(f, u)
            quad = models.laplace_exponent_quadrature(f, u)
        else:
            psi = models.char_exponent(f, u)
            closed = psi.real
            quad = models.char_exponent_quadrature(f, u)
            rep.add(u, "imag_closed", psi.imag)
        rep.add(u, "closed_form", closed)
        rep.add(u, "quadrature", quad)
        rep.add(u, "abs_gap", abs(closed - quad))
        rep.add(u, "ratio", quad / closed if closed else 1.0)
    gaps = rep.values("abs_gap")
    ratios = rep.values("ratio")
    mismatch = max(gaps) > tol and (max(ratios) - min(ratios)) < 1e-6 * abs(ratios[0])
    rep.add(math.nan, "constant_factor_mismatch", float(mismatch))
    return rep


def stable_normalization_factor(alpha: float) -> float:
    """int (cos(us) - 1)|s|^(-1-alpha) ds = -C |u|^alpha; returns C."""
    return math.pi / (models.gamma_fn(1.0 + alpha) * math.sin(0.5 * math.pi * alpha))


# ---------------------------------------------------------------------------
# UT certificates


def _check_half_open_grid(alpha_grid):
    grid = [float(a) for a in alpha_grid]
    if not grid:
        raise DomainError("alpha grid is empty")
    if any(not 0 < a < 0.5 for a in grid):
        raise DomainError("alpha grid must lie in (0, 1/2)")
    return grid


def ut_certificate_tss(alpha_grid) -> DiagnosticsReport:
    """Per-alpha int_0^1 s^2 dLambda + int_0^inf s dLambda for TSS, and the grid supremum."""
    rep = DiagnosticsReport("ut-certificate tss")
    totals = []
    for a in _check_half_open_grid(alpha_grid):
        f = models.tss(a)
        s2 = models.levy_moment(f, 2.0, 0.0, 1.0)
        s1 = models.levy_moment(f, 1.0, 0.0, math.inf)
        total = s2 + s1
        if not math.isfinite(total):
            raise CertificateFailure(f"UT integral not finite at alpha={a:g}", a)
        rep.add(a, "int_s2_0_1", s2)
        rep.add(a, "int_s_0_inf", s1)
        # Gamma(1-alpha)/Gamma(1-alpha)
        rep.add(a, "int_s_0_inf_closed", 1.0)
        rep.add(a, "total", total)
        totals.append(total)
    rep.add(max(float(x) for x in alpha_grid), "sup_total", max(totals))
    return rep


def _mts_tail_bound_integral() -> float:
    # int_{1/4}^inf exp(-(t + 1/(4t))) dt
    def fn(v):
        t = np.exp(v)
        return np.exp(v - t - 0.25 / t)

    return models.integrate_log(fn, math.log(0.25), math.log(80.0))


def ut_certificate_mts(alpha_grid) -> DiagnosticsReport:
    """MTS moment bounds from the integral representation of K, checked row by row."""
    rep = DiagnosticsReport("ut-certificate mts")
    tail_int = _mts_tail_bound_integral()
    for a in _check_half_open_grid(alpha_grid):
        f = models.mts(a)
        lhs_s2 = models.abs_moment(f, 2.0, 0.0, 1.0)
        rhs_s2 = math.sqrt(math.pi) * 2.0 ** (0.5 - a) * models.gamma_fn(1.0 - a)
        lhs_tail = models.abs_moment(f, 1.0, 1.0, math.inf)
        rhs_tail = 5.0 * 2.0 ** (0.5 - a) * tail_int
        rep.add(a, "int_abs_s_le_1_s2", lhs_s2)
        rep.add(a, "bound_s2", rhs_s2)
        rep.add(a, "slack_s2", rhs_s2 - lhs_s2)
        rep.add(a, "int_abs_s_gt_1_abs_s", lhs_tail)
        rep.add(a, "bound_tail", rhs_tail)
        rep.add(a, "slack_tail", rhs_tail - lhs_tail)
        rep.add(a, "int_abs_s_le_1_s", _odd_first_moment(f))
        if not lhs_s2 <= rhs_s2:
            raise CertificateFailure(f"MTS second-moment bound violated at alpha={a:g}", a)
        if not lhs_tail <= rhs_tail:
            raise CertificateFailure(f"MTS tail bound violated at alpha={a:g}", a)
    return rep


def _odd_first_moment(f, lo=1e-8):
    """int_{lo<|s|<=1} s dLambda(s), pairing the density at s and -s pointwise."""

    def fn(v):
        s = np.exp(v)
        return s * s * (models.levy_density(f, s) - models.levy_density(f, -s))

    return models.integrate_log(fn, math.log(lo), 0.0)


# ---------------------------------------------------------------------------
# convergence curves


class ConvergenceKind(str, Enum):
    TSS_TO_GAMMA = "tss-to-gamma"
    MTS_TO_NIG = "mts-to-nig"
    YEPS_TO_T = "yeps-to-t"
    YTEPS_TO_W = "yteps-to-w"


def limit_stream(rng: RngStream) -> RngStream:
    return rng.child("limit")


def param_stream(rng: RngStream, i: int, tag: str = "param") -> RngStream:
    return rng.child(tag, i)


def _fdd_columns(grid):
    out = []
    for t in FDD_TIMES:
        k = t * grid.n_steps
        if abs(k - round(k)) < 1e-9:
            out.append((t, int(round(k))))
    return out


def _check_monotone_schedule(schedule, direction, lo, hi, name):
    sched = [float(x) for x in schedule]
    if not sched:
        raise DomainError(f"{name} schedule is empty")
    if any(not lo < x < hi for x in sched):
        raise DomainError(f"{name} schedule must lie in ({lo}, {hi})")
    pairs = zip(sched, sched[1:])
    if direction < 0 and any(b >= a for a, b in pairs):
        raise DomainError(f"{name} schedule must be strictly decreasing")
    if direction > 0 and any(b <= a for a, b in pairs):
        raise DomainError(f"{name} schedule must be strictly increasing")
    return sched


def convergence_curve(
    kind,
    schedule,
    n_samples: int,
    rng: RngStream,
    grid: PathGrid | None = None,
    family: models.ProcessFamily | None = None,
    u_grid=DEFAULT_U_GRID,
    eps_cut: float = 1e-3,
) -> DiagnosticsReport:
    kind = ConvergenceKind(kind)
    rep = DiagnosticsReport(f"convergence {kind.value}", seed=rng.seed)
    n = int(n_samples)

    if kind is ConvergenceKind.TSS_TO_GAMMA:
        grid = grid or PathGrid(16)
        alphas = _check_monotone_schedule(schedule, -1, 0.0, 0.5, "alpha")
        limit = sample_gamma(grid, limit_stream(rng), n)
        for i, a in enumerate(alphas):
            p = sample_tss(a, grid, param_stream(rng, i), n)
            for t, k in _fdd_columns(grid):
                ks = ks_two_sample(p.values[:, k], limit.values[:, k])
                rep.add(a, "ks_t1" if t == 1.0 else f"ks_t{t:g}", ks.statistic, n=n)
            ks = ks_two_sample(p.terminal, limit.terminal)
            rep.add(a, "ks_pvalue", ks.pvalue, n=n)
        return rep

    if kind is ConvergenceKind.MTS_TO_NIG:
        grid = grid or PathGrid(16)
        alphas = _check_monotone_schedule(schedule, 1, 0.0, 0.5, "alpha")
        limit = sample_nig(grid, limit_stream(rng), n)

        def nig_cf(u):
            return cmath_exp(models.char_exponent(models.nig(), u))

        for i, a in enumerate(alphas):
            p = sample_mts(a, grid, param_stream(rng, i), n, eps_cut=eps_cut)
            est = cf_distance(p.terminal, nig_cf, u_grid)
            bias = max(abs(cmath_exp(models.char_exponent(models.mts(a), u)) - nig_cf(u)) for u in u_grid)
            rep.add(a, "cf_distance", est.value, est.stderr, n)
            rep.add(a, "cf_bias", bias)
            rep.add(a, "ks_t1", ks_two_sample(p.terminal, limit.terminal).statistic, n=n)
        return rep

    if kind is ConvergenceKind.YEPS_TO_T:
        grid = grid or PathGrid(64)
        f = family or models.stable_sub(0.5)
        epss = _check_monotone_schedule(schedule, -1, 0.0, 1.0 + 1e-12, "eps")
        t = grid.times
        for i, eps in enumerate(epss):
            p = renormalize_sub(f, eps, grid, param_stream(rng, i), n)
            sup_dev = np.max(np.abs(p.values - t[None, :]), axis=1)
            y1 = p.terminal
            rep.add(eps, "sup_dev_median", float(np.median(sup_dev)), n=n)
            rep.add(eps, "mean_Y1", y1.mean(), y1.std() / math.sqrt(n), n)
            rep.add(eps, "var_Y1", y1.var(ddof=1), n=n)
            rep.add(eps, "var_bound", eps / models.mu_eps(f, eps))
        return rep

    grid = grid or PathGrid(16)
    f = family or models.nig()
    epss = _check_monotone_schedule(schedule, -1, 0.0, 1.0 + 1e-12, "eps")
    limit = sample_brownian(grid, limit_stream(rng), n)
    for i, eps in enumerate(epss):
        p = renormalize_compensated(f, eps, grid, param_stream(rng, i), n)
        bound = p.meta["jump_bound"]
        rep.add(eps, "ks_t1", ks_two_sample(p.terminal, limit.terminal).statistic, n=n)
        rep.add(eps, "ks_t1_vs_normal_cdf", ks_one_sample(p.terminal, normal_cdf).statistic, n=n)
        rep.add(eps, "var_Y1", p.terminal.var(ddof=1), n=n)
        rep.add(eps, "max_jump_over_bound", float(p.max_jump.max()) / bound, n=n)
        rep.add(eps, "jump_bound", bound)
    return rep


def cmath_exp(z: complex) -> complex:
    return complex(np.exp(z))


def is_strictly_decreasing(values) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))
