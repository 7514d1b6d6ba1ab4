"""Euler schemes for dY = a(Y-) dZ + h(Y-) dtau and stability experiments."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import models
from .diagnostics import DiagnosticsReport, ks_two_sample, limit_stream, param_stream
from .errors import CertificateFailure, DomainError, StepOverflowError
from .renormalization import large_jump_drift, renormalize_compensated, renormalize_sub
from .samplers import (
    PathGrid,
    RngStream,
    SamplePath,
    sample_brownian,
    sample_gamma,
    sample_mts,
    sample_nig,
    sample_tss,
)

CHECK_RANGE = 1e6
CONVERGENCE_RANGE = 10.0


@dataclass(frozen=True)
class Coefficient:
    """A vectorized coefficient x -> c(x) with its declared growth and Lipschitz constants."""

    id: str
    eval: Callable[[np.ndarray], np.ndarray]
    growth_K: float
    lipschitz_L: float | None = None

    def __post_init__(self):
        if not self.growth_K >= 0:
            raise DomainError("growth constant must be non-negative")
        if self.lipschitz_L is not None and not self.lipschitz_L >= 0:
            raise DomainError("Lipschitz constant must be non-negative")

    @property
    def lipschitz(self) -> bool:
        return self.lipschitz_L is not None

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=float))

    def _probe(self, rng: RngStream, n: int):
        g = rng.child("probe", self.id).generator()
        # uniform on the range plus log-uniform magnitudes so small |x| is covered
        mags = np.exp(g.uniform(-10.0, math.log(CHECK_RANGE), n))
        return np.concatenate([g.uniform(-CHECK_RANGE, CHECK_RANGE, n), mags * g.choice([-1.0, 1.0], n)])

    def check_growth(self, rng: RngStream | None = None, n: int = 20000):
        """|c(x)| <= K (1 + |x|) at random points of [-1e6, 1e6]."""
        x = self._probe(rng or RngStream(0), n)
        bad = np.abs(self(x)) > self.growth_K * (1.0 + np.abs(x)) * (1 + 1e-12)
        if bad.any():
            raise CertificateFailure(f"{self.id}: growth bound fails at x={x[bad][0]:g}", self.id)

    def check_lipschitz(self, rng: RngStream | None = None, n: int = 20000):
        """|c(x) - c(y)| <= L |x - y| at random pairs."""
        if not self.lipschitz:
            raise DomainError(f"{self.id} declares no Lipschitz constant")
        x = self._probe(rng or RngStream(0), n)
        g = (rng or RngStream(0)).child("pair", self.id).generator()
        y = x + g.standard_normal(x.size) * np.maximum(1.0, 1e-3 * np.abs(x))
        lhs = np.abs(self(x) - self(y))
        bad = lhs > self.lipschitz_L * np.abs(x - y) * (1 + 1e-9) + 1e-12
        if bad.any():
            raise CertificateFailure(f"{self.id}: Lipschitz bound fails at x={x[bad][0]:g}", self.id)


def constant(c: float) -> Coefficient:
    return Coefficient(f"const({c:g})", lambda x: np.full_like(x, c), abs(c), 0.0)


def linear(k: float, b: float = 0.0) -> Coefficient:
    return Coefficient(f"{k:g}*x+{b:g}", lambda x: k * x + b, max(abs(k), abs(b)), abs(k))


@dataclass(frozen=True)
class CoefficientFamily:
    """(a_param, h_param) indexed by a scalar, converging to (a, h) at ``limit_point``."""

    at: Callable[[float], tuple[Coefficient, Coefficient]]
    limit: tuple[Coefficient, Coefficient]
    limit_point: float
    label: str = ""

    def check_uniform_convergence(self, params, n_grid: int = 4001) -> list[float]:
        """sup over [-10, 10] of |a_p - a| + |h_p - h| along ``params``; must decrease to the limit."""
        x = np.linspace(-CONVERGENCE_RANGE, CONVERGENCE_RANGE, n_grid)
        a0, h0 = self.limit
        errs = []
        for p in params:
            a, h = self.at(p)
            errs.append(float(np.max(np.abs(a(x) - a0(x)) + np.abs(h(x) - h0(x)))))
        dist = [abs(p - self.limit_point) for p in params]
        order = np.argsort(dist)[::-1]
        ordered = [errs[i] for i in order]
        if any(b > a + 1e-15 for a, b in zip(ordered, ordered[1:])):
            raise CertificateFailure(f"{self.label}: coefficients do not converge uniformly", self.label)
        return errs

    def check_growth(self, params, rng: RngStream | None = None):
        for p in params:
            for c in self.at(p):
                c.check_growth(rng)
        for c in self.limit:
            c.check_growth(rng)

    @staticmethod
    def fixed(a: Coefficient, h: Coefficient, limit_point: float = 0.0) -> "CoefficientFamily":
        return CoefficientFamily(lambda _p: (a, h), (a, h), limit_point, f"fixed({a.id},{h.id})")


def sine_family(limit_point: float = 0.0) -> CoefficientFamily:
    """a_p(x) = (1 + d) sin x + 1, h_p(x) = d x with d = |p - limit_point|.

    At limit_point = 0 this is a_alpha = (1 + alpha) sin x + 1, h_alpha = alpha x.
    """

    def at(p):
        d = abs(p - limit_point)
        a = Coefficient(f"(1+{d:g})sin(x)+1", lambda x, d=d: (1.0 + d) * np.sin(x) + 1.0, 2.0 + d, 1.0 + d)
        h = Coefficient(f"{d:g}*x", lambda x, d=d: d * x, d, d)
        return a, h

    return CoefficientFamily(at, at(limit_point), limit_point, f"sine@{limit_point:g}")


def renormalized_family() -> CoefficientFamily:
    """a(x) = sin x + 1, h(x) = -x/2, independent of eps."""
    a = Coefficient("sin(x)+1", lambda x: np.sin(x) + 1.0, 2.0, 1.0)
    h = Coefficient("-x/2", lambda x: -0.5 * x, 0.5, 0.5)
    return CoefficientFamily.fixed(a, h)


def sqrt_demo_family() -> CoefficientFamily:
    """a(x) = |x|^(1/2) + 1, h = 0: linear growth but not Lipschitz at 0."""
    a = Coefficient("sqrt|x|+1", lambda x: np.sqrt(np.abs(x)) + 1.0, 2.0, None)
    return CoefficientFamily.fixed(a, constant(0.0))


@dataclass
class SdeProblem:
    """Driver Z and time-change tau on one shared grid; Y(0) = 0."""

    driver: SamplePath
    a: Coefficient
    h: Coefficient
    time_driver: SamplePath | None = None
    y0: float = 0.0

    def __post_init__(self):
        if self.y0 != 0.0:
            raise DomainError("the scheme starts from Y(0) = 0")
        if self.time_driver is not None:
            td = self.time_driver
            if td.grid != self.driver.grid or td.values.shape != self.driver.values.shape:
                raise DomainError("driver and time driver must share one grid and path count")

    @property
    def grid(self) -> PathGrid:
        return self.driver.grid


def euler_solve(p: SdeProblem) -> SamplePath:
    """Left-point Euler: Y_{k+1} = Y_k + a(Y_k) dZ_k + h(Y_k) dtau_k, all paths at once."""
    dz = p.driver.increments
    if p.time_driver is None:
        dtau = np.full_like(dz, p.grid.dt)
    else:
        dtau = p.time_driver.increments
    n_paths, n = dz.shape
    y = np.empty((n_paths, n + 1))
    y[:, 0] = p.y0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            yk = y[:, k]
            y[:, k + 1] = yk + p.a(yk) * dz[:, k] + p.h(yk) * dtau[:, k]
            if not np.all(np.isfinite(y[:, k + 1])):
                raise StepOverflowError(f"Euler iterate not finite at step {k + 1}", step=k + 1)
    return SamplePath(p.grid, y, meta={"a": p.a.id, "h": p.h.id})


def _compare(rep, param, sol, lim, n):
    rep.add(param, "ks_terminal", ks_two_sample(sol.terminal, lim.terminal).statistic, n=n)
    rep.add(param, "ks_sup", ks_two_sample(np.max(np.abs(sol.values), axis=1),
                                           np.max(np.abs(lim.values), axis=1)).statistic, n=n)


def _schedule(values, lo, hi, direction, name):
    sched = [float(x) for x in values]
    if not sched:
        raise DomainError(f"{name} schedule is empty")
    if any(not lo < x < hi for x in sched):
        raise DomainError(f"{name} values must lie in ({lo}, {hi})")
    if any((b - a) * direction <= 0 for a, b in zip(sched, sched[1:])):
        raise DomainError(f"{name} schedule must move monotonically toward the limit")
    return sched


def stability_experiment_tss(
    cf: CoefficientFamily,
    alpha_schedule,
    grid: PathGrid,
    rng: RngStream,
    n_paths: int,
) -> DiagnosticsReport:
    """Euler solutions driven by TSS(alpha) against the Gamma-driven limit, with tau(t) = t."""
    alphas = _schedule(alpha_schedule, 0.0, 0.5, -1, "alpha")
    cf.check_growth(alphas, rng)
    rep = DiagnosticsReport(f"sde-stability tss {cf.label}", seed=rng.seed)
    a0, h0 = cf.limit
    lim = euler_solve(SdeProblem(sample_gamma(grid, limit_stream(rng), n_paths), a0, h0))
    for i, al in enumerate(alphas):
        a, h = cf.at(al)
        z = sample_tss(al, grid, param_stream(rng, i), n_paths)
        _compare(rep, al, euler_solve(SdeProblem(z, a, h)), lim, n_paths)
    return rep


def stability_experiment_mts(
    cf: CoefficientFamily,
    alpha_schedule,
    grid: PathGrid,
    rng: RngStream,
    n_paths: int,
    eps_cut: float = 1e-3,
) -> DiagnosticsReport:
    """Euler solutions driven by MTS(alpha), alpha up to 1/2, against the NIG-driven limit."""
    alphas = _schedule(alpha_schedule, 0.0, 0.5, 1, "alpha")
    cf.check_growth(alphas, rng)
    rep = DiagnosticsReport(f"sde-stability mts {cf.label}", seed=rng.seed)
    a0, h0 = cf.limit
    lim = euler_solve(SdeProblem(sample_nig(grid, limit_stream(rng), n_paths), a0, h0))
    for i, al in enumerate(alphas):
        a, h = cf.at(al)
        z = sample_mts(al, grid, param_stream(rng, i), n_paths, eps_cut=eps_cut)
        _compare(rep, al, euler_solve(SdeProblem(z, a, h)), lim, n_paths)
    return rep


def stability_experiment_renormalized(
    cf: CoefficientFamily,
    f_tilde: models.ProcessFamily,
    f_sub: models.ProcessFamily,
    eps_schedule,
    grid: PathGrid,
    rng: RngStream,
    n_paths: int,
) -> DiagnosticsReport:
    """Driver Y~_eps (compensated) and time change Y_eps (subordinator), independent.

    The limit is driven by a Brownian motion with tau(t) = t.
    """
    if not f_sub.is_subordinator:
        raise DomainError(f"{f_sub.label} is not a subordinator")
    epss = _schedule(eps_schedule, 0.0, 1.0 + 1e-12, -1, "eps")
    cf.check_growth(epss, rng)
    rep = DiagnosticsReport(f"sde-stability renormalized {f_tilde.label}/{f_sub.label}", seed=rng.seed)
    a0, h0 = cf.limit
    lim = euler_solve(SdeProblem(sample_brownian(grid, limit_stream(rng), n_paths), a0, h0))
    for i, eps in enumerate(epss):
        a, h = cf.at(eps)
        z = renormalize_compensated(f_tilde, eps, grid, param_stream(rng, i, "tilde"), n_paths)
        tau = renormalize_sub(f_sub, eps, grid, param_stream(rng, i, "sub"), n_paths)
        _compare(rep, eps, euler_solve(SdeProblem(z, a, h, tau)), lim, n_paths)
        rep.add(eps, "large_jump_drift", large_jump_drift(f_tilde, eps))
    return rep


@dataclass
class RefinementResult:
    coarse: int
    fine: int
    ks: float
    n_paths: int
    extra: dict = field(default_factory=dict)


def grid_refinement_ks(
    cf: CoefficientFamily,
    param: float,
    coarse: int,
    fine: int,
    rng: RngStream,
    n_paths: int,
) -> RefinementResult:
    """KS between terminal Euler values on a coarse and a fine grid, Gamma driver."""
    a, h = cf.at(param)
    sols = []
    for i, n in enumerate((coarse, fine)):
        z = sample_gamma(PathGrid(n), param_stream(rng, i, "refine"), n_paths)
        sols.append(euler_solve(SdeProblem(z, a, h)).terminal)
    return RefinementResult(coarse, fine, ks_two_sample(*sols).statistic, n_paths)
