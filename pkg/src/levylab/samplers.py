"""Path simulation on the uniform grid t_k = k / n_steps of [0, 1].

Every sampler draws ``n_paths`` independent paths at once and returns a
:class:`SamplePath` whose ``values`` has shape ``(n_paths, n_steps + 1)``.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import models
from .errors import AcceptanceRateError, DomainError, NumericalError, UnsupportedFamilyError
from .models import Kind, ProcessFamily


@dataclass(frozen=True)
class PathGrid:
    n_steps: int

    def __post_init__(self):
        if int(self.n_steps) < 1:
            raise DomainError("n_steps must be >= 1")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def dt(self) -> float:
        return 1.0 / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) / self.n_steps


def _mix64(*parts) -> int:
    h = hashlib.blake2b(repr(parts).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by (seed, stream_id)."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = int(getattr(self, name))
            if not 0 <= v < 2**64:
                raise DomainError(f"{name} must be a 64-bit unsigned integer")
            object.__setattr__(self, name, v)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, *keys) -> "RngStream":
        """Derived stream, independent of this one and of other children."""
        return RngStream(self.seed, _mix64(self.stream_id, *keys))


@dataclass
class SamplePath:
    grid: PathGrid
    values: np.ndarray
    # per-path largest |jump| when the sampler tracks individual jumps
    max_jump: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def terminal(self) -> np.ndarray:
        return self.values[:, -1]

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=1)

    def path(self, i: int) -> np.ndarray:
        return self.values[i]

    def scaled(self, factor: float) -> "SamplePath":
        mj = None if self.max_jump is None else self.max_jump * abs(factor)
        return SamplePath(self.grid, self.values * factor, mj, dict(self.meta))


def _from_increments(grid, inc, max_jump=None, **meta):
    values = np.zeros((inc.shape[0], grid.n_steps + 1))
    np.cumsum(inc, axis=1, out=values[:, 1:])
    return SamplePath(grid, values, max_jump, meta)


def _check_paths(n_paths):
    if int(n_paths) < 1:
        raise DomainError("n_paths must be >= 1")
    return int(n_paths)


# ---------------------------------------------------------------------------
# exact increment samplers


def sample_brownian(grid: PathGrid, rng: RngStream, n_paths: int = 1) -> SamplePath:
    n_paths = _check_paths(n_paths)
    g = rng.generator()
    inc = g.standard_normal((n_paths, grid.n_steps)) * math.sqrt(grid.dt)
    return _from_increments(grid, inc)


def sample_gamma(grid: PathGrid, rng: RngStream, n_paths: int = 1) -> SamplePath:
    n_paths = _check_paths(n_paths)
    g = rng.generator()
    inc = g.standard_gamma(grid.dt, size=(n_paths, grid.n_steps))
    return _from_increments(grid, inc)


def _log_positive_stable(g, alpha, size):
    """log of Kanter's positive stable variate with E exp(-uS) = exp(-u^alpha)."""
    u = g.uniform(0.0, math.pi, size)
    e = g.standard_exponential(size)
    log_a = (
        alpha / (1.0 - alpha) * np.log(np.sin(alpha * u))
        + np.log(np.sin((1.0 - alpha) * u))
        - np.log(np.sin(u)) / (1.0 - alpha)
    )
    return (1.0 - alpha) / alpha * (log_a - np.log(e))


def _check_alpha(alpha, hi=1.0):
    if not 0 < alpha < hi:
        raise DomainError(f"alpha must lie in (0, {hi}), got {alpha}")


def sample_stable_sub(alpha: float, grid: PathGrid, rng: RngStream, n_paths: int = 1) -> SamplePath:
    _check_alpha(alpha)
    n_paths = _check_paths(n_paths)
    g = rng.generator()
    log_s = _log_positive_stable(g, alpha, (n_paths, grid.n_steps))
    with np.errstate(over="ignore"):
        inc = np.exp(log_s + math.log(grid.dt) / alpha)
    return _from_increments(grid, inc)


def sample_tss(
    alpha: float,
    grid: PathGrid,
    rng: RngStream,
    n_paths: int = 1,
    acceptance_floor: float = 1e-3,
) -> SamplePath:
    """Tempered stable subordinator by increment-level exponential tilting.

    A proposal S is a stable-subordinator increment over dt scaled by
    alpha^(-1/alpha); it is accepted with probability exp(-S).  The expected
    acceptance is exp(-dt/alpha).
    """
    _check_alpha(alpha)
    n_paths = _check_paths(n_paths)
    expected = math.exp(-grid.dt / alpha)
    if expected < acceptance_floor:
        need = math.ceil(1.0 / (alpha * -math.log(acceptance_floor)))
        raise AcceptanceRateError(
            f"expected acceptance exp(-dt/alpha) = {expected:.3g} is below {acceptance_floor:g}; "
            f"use n_steps >= {need} for alpha = {alpha:g}"
        )
    g = rng.generator()
    shift = math.log(grid.dt / alpha) / alpha
    out = np.empty(n_paths * grid.n_steps)
    pending = np.arange(out.size)
    proposals = 0
    while pending.size:
        proposals += pending.size
        with np.errstate(over="ignore"):
            s = np.exp(_log_positive_stable(g, alpha, pending.size) + shift)
        accept = g.standard_exponential(pending.size) > s
        out[pending[accept]] = s[accept]
        pending = pending[~accept]
    inc = out.reshape(n_paths, grid.n_steps)
    return _from_increments(grid, inc, acceptance_rate=out.size / proposals, proposals=proposals)


def _inverse_gaussian(g, mean, shape, size):
    """Michael-Schucany-Haas generator, rearranged to avoid cancellation."""
    y = g.standard_normal(size) ** 2
    my = mean * y
    x = mean - 2.0 * mean * my / (my + np.sqrt(my * my + 4.0 * mean * shape * y))
    flip = g.uniform(size=size) > mean / (mean + x)
    return np.where(flip, mean * mean / x, x)


def sample_nig(grid: PathGrid, rng: RngStream, n_paths: int = 1) -> SamplePath:
    """NIG path as Brownian motion time-changed by an inverse Gaussian subordinator."""
    n_paths = _check_paths(n_paths)
    g = rng.generator()
    dt = grid.dt
    size = (n_paths, grid.n_steps)
    clock = _inverse_gaussian(g, dt, dt * dt, size)
    inc = np.sqrt(clock) * g.standard_normal(size)
    return _from_increments(grid, inc)


# ---------------------------------------------------------------------------
# compound Poisson machinery


class JumpTable:
    """Inverse of the cumulative Lévy mass on [lo, hi) of the positive half-line.

    Mass is tabulated on ``n`` log-spaced nodes with 8-point Gauss-Legendre
    per segment and inverted with a monotone cubic (PCHIP) interpolant.
    """

    _GL_X, _GL_W = np.polynomial.legendre.leggauss(8)

    def __init__(self, f: ProcessFamily, lo: float, hi: float = math.inf, n: int = 2048):
        if not 0 < lo < hi:
            raise DomainError(f"jump table needs 0 < lo < hi, got [{lo}, {hi}]")
        self.family, self.lo, self.hi = f, lo, hi
        top = hi
        if math.isinf(hi):
            if f.kind in (Kind.STABLE_SUB, Kind.SYMMETRIC_STABLE):
                raise UnsupportedFamilyError("untempered families need a finite upper jump bound")
            top = max(80.0, 2.0 * lo)
        if f.kind is Kind.HARMONIC_CUTOFF:
            top = min(top, 1.0)
        v = np.linspace(math.log(lo), math.log(top), n)
        half = 0.5 * np.diff(v)
        mid = 0.5 * (v[:-1] + v[1:])
        nodes = mid[:, None] + half[:, None] * self._GL_X[None, :]
        dens = np.exp(nodes + models.log_density_positive(f, np.exp(nodes)))
        seg = (dens @ self._GL_W) * half
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        self.total = float(cum[-1])
        if not self.total > 0 or not np.isfinite(self.total):
            raise NumericalError(f"jump table for {f.label} has no mass on [{lo}, {hi})")
        check = models.levy_moment(f, 0.0, lo, top)
        if abs(check - self.total) > 1e-8 * check:
            raise NumericalError(
                f"jump table mass {self.total} disagrees with quadrature {check}",
                residual=abs(check - self.total),
            )
        keep = np.concatenate([[True], np.diff(cum) > 0])
        self._inverse = PchipInterpolator(cum[keep] / self.total, v[keep])
        self._vmax = math.log(top)

    def sample(self, g: np.random.Generator, size: int) -> np.ndarray:
        v = self._inverse(g.uniform(size=size))
        return np.exp(np.clip(v, math.log(self.lo), self._vmax))


def _compound_poisson(g, grid, n_paths, tables, budget_per_chunk=4_000_000):
    """Per-step sums of jumps drawn from ``tables`` = [(table, sign), ...].

    Returns (increments, per-path max |jump|, per-path jump count).
    """
    n = grid.n_steps
    rate = sum(t.total for t, _ in tables)
    per_path = max(rate, 1e-300)
    chunk = max(1, min(n_paths, int(budget_per_chunk / per_path)))
    inc = np.zeros((n_paths, n))
    max_jump = np.zeros(n_paths)
    n_jumps = np.zeros(n_paths, dtype=np.int64)
    for start in range(0, n_paths, chunk):
        rows = min(chunk, n_paths - start)
        for table, sign in tables:
            counts = g.poisson(table.total * grid.dt, size=rows * n)
            m = int(counts.sum())
            if m == 0:
                continue
            mags = table.sample(g, m)
            cell = np.repeat(np.arange(rows * n), counts)
            inc[start:start + rows] += sign * np.bincount(cell, weights=mags, minlength=rows * n).reshape(rows, n)
            per_row = counts.reshape(rows, n).sum(axis=1)
            n_jumps[start:start + rows] += per_row
            nonempty = per_row > 0
            starts = np.concatenate([[0], np.cumsum(per_row)[:-1]])[nonempty]
            row_max = np.zeros(rows)
            row_max[nonempty] = np.maximum.reduceat(mags, starts)
            np.maximum(max_jump[start:start + rows], row_max, out=max_jump[start:start + rows])
    return inc, max_jump, n_jumps


def _jump_tables(f, lo, hi, n=2048):
    table = JumpTable(f, lo, hi, n)
    return [(table, 1.0)] if f.is_subordinator else [(table, 1.0), (table, -1.0)]


def sample_mts(
    alpha: float,
    grid: PathGrid,
    rng: RngStream,
    n_paths: int = 1,
    eps_cut: float = 1e-3,
) -> SamplePath:
    """MTS path: compound Poisson jumps above ``eps_cut`` plus a Gaussian for the rest.

    The Gaussian carries variance sigma^2(eps_cut) per unit time.
    """
    _check_alpha(alpha, 0.5)
    if not 0 < eps_cut <= 1:
        raise DomainError("eps_cut must lie in (0, 1]")
    n_paths = _check_paths(n_paths)
    f = models.mts(alpha)
    g = rng.generator()
    tables = _jump_tables(f, eps_cut, math.inf)
    inc, max_jump, n_jumps = _compound_poisson(g, grid, n_paths, tables)
    small_sd = math.sqrt(models.sigma2_eps(f, eps_cut) * grid.dt)
    inc += small_sd * g.standard_normal(inc.shape)
    return _from_increments(
        grid, inc, max_jump, jump_rate=2.0 * tables[0][0].total, small_jump_sd=small_sd, n_jumps=n_jumps
    )


DEFAULT_DELTA_RATIO = 1e-3
DEFAULT_JUMP_BUDGET = 2000.0


def default_delta(f: ProcessFamily, eps: float, budget: float = DEFAULT_JUMP_BUDGET) -> float:
    """Inner truncation eps*1e-3, raised until the jump rate on [delta, eps) fits ``budget``."""
    delta = eps * DEFAULT_DELTA_RATIO
    rate = models.abs_moment(f, 0.0, delta, eps)
    if rate <= budget:
        return delta
    lo, hi = math.log(delta), math.log(eps)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if models.abs_moment(f, 0.0, math.exp(mid), eps) > budget:
            lo = mid
        else:
            hi = mid
    return math.exp(hi)


def _check_delta(delta, eps):
    if not 0 < delta < eps:
        raise DomainError(f"need 0 < delta < eps, got delta={delta}, eps={eps}")


def sample_small_jump_sub(
    f: ProcessFamily,
    eps: float,
    grid: PathGrid,
    rng: RngStream,
    delta: float | None = None,
    n_paths: int = 1,
) -> SamplePath:
    """Sum of the jumps of a subordinator with size in (0, eps).

    Jumps in [delta, eps) are simulated; those below delta are replaced by
    their mean drift mu(delta) per unit time.
    """
    if not f.is_subordinator:
        raise UnsupportedFamilyError(f"{f.label} is not a subordinator")
    if not 0 < eps <= 1:
        raise DomainError("eps must lie in (0, 1]")
    if delta is None:
        delta = default_delta(f, eps)
    _check_delta(delta, eps)
    n_paths = _check_paths(n_paths)
    g = rng.generator()
    tables = _jump_tables(f, delta, eps)
    inc, max_jump, n_jumps = _compound_poisson(g, grid, n_paths, tables)
    drift = models.mu_eps(f, delta)
    inc += drift * grid.dt
    return _from_increments(grid, inc, max_jump, delta=delta, drift=drift, n_jumps=n_jumps)


def sample_compensated_small_jumps(
    f: ProcessFamily,
    eps: float,
    grid: PathGrid,
    rng: RngStream,
    delta: float | None = None,
    n_paths: int = 1,
) -> SamplePath:
    """Compensated sum of jumps in (-eps, eps).

    Jumps with delta <= |s| < eps are simulated and compensated by their
    mean; the remainder below delta is replaced by a centred Gaussian of the
    same variance.
    """
    if not 0 < eps <= 1:
        raise DomainError("eps must lie in (0, 1]")
    if delta is None:
        delta = default_delta(f, eps)
    _check_delta(delta, eps)
    n_paths = _check_paths(n_paths)
    g = rng.generator()
    tables = _jump_tables(f, delta, eps)
    inc, max_jump, n_jumps = _compound_poisson(g, grid, n_paths, tables)
    compensator = 0.0 if f.is_symmetric else models.levy_moment(f, 1.0, delta, eps)
    inc -= compensator * grid.dt
    small_sd = math.sqrt(models.sigma2_eps(f, delta) * grid.dt)
    inc += small_sd * g.standard_normal(inc.shape)
    return _from_increments(grid, inc, max_jump, delta=delta, compensator=compensator, n_jumps=n_jumps)


def sample_family(f: ProcessFamily, grid: PathGrid, rng: RngStream, n_paths: int = 1, **kw) -> SamplePath:
    """Dispatch to the sampler for ``f``."""
    k = f.kind
    if k is Kind.GAMMA:
        return sample_gamma(grid, rng, n_paths)
    if k is Kind.STABLE_SUB:
        return sample_stable_sub(f.alpha, grid, rng, n_paths)
    if k is Kind.TEMPERED_STABLE_SUB:
        return sample_tss(f.alpha, grid, rng, n_paths, **kw)
    if k is Kind.NIG:
        return sample_nig(grid, rng, n_paths)
    if k is Kind.MODIFIED_TEMPERED_STABLE:
        return sample_mts(f.alpha, grid, rng, n_paths, **kw)
    if k is Kind.BROWNIAN:
        return sample_brownian(grid, rng, n_paths)
    raise UnsupportedFamilyError(f"no path sampler for {f.label}")
