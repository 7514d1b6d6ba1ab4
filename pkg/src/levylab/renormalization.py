"""Renormalized small-jump processes and their scaling schedules.

Y_eps = X_eps / mu(eps) for subordinators, and the compensated version
Y~_eps = X~_eps / sigma(eps) for any family.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from . import models
from .errors import CertificateFailure, DomainError, LevyError, UnsupportedFamilyError
from .models import ProcessFamily
from .samplers import (
    PathGrid,
    RngStream,
    SamplePath,
    sample_compensated_small_jumps,
    sample_small_jump_sub,
)

DEFAULT_SCHEDULE = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4)
REPORT_COLUMNS = ("eps", "mu_eps", "sigma_eps", "b_eps", "mu_over_eps", "sigma_over_eps")


def renormalize_sub(
    f: ProcessFamily,
    eps: float,
    grid: PathGrid,
    rng: RngStream,
    n_paths: int = 1,
    delta: float | None = None,
) -> SamplePath:
    """Y_eps = mu(eps)^-1 X_eps; E Y_eps(1) = 1."""
    if not f.is_subordinator:
        raise UnsupportedFamilyError(f"{f.label} is not a subordinator")
    path = sample_small_jump_sub(f, eps, grid, rng, delta=delta, n_paths=n_paths)
    out = path.scaled(1.0 / models.mu_eps(f, eps))
    out.meta["eps"] = eps
    return out


def renormalize_compensated(
    f: ProcessFamily,
    eps: float,
    grid: PathGrid,
    rng: RngStream,
    n_paths: int = 1,
    delta: float | None = None,
) -> SamplePath:
    """Y~_eps = sigma(eps)^-1 X~_eps; unit variance at time 1, jumps below eps/sigma(eps)."""
    sigma = models.sigma_eps(f, eps)
    path = sample_compensated_small_jumps(f, eps, grid, rng, delta=delta, n_paths=n_paths)
    out = path.scaled(1.0 / sigma)
    out.meta.update(eps=eps, jump_bound=eps / sigma)
    return out


def large_jump_drift(f: ProcessFamily, eps: float) -> float:
    """int_{|s|>1} |s| dLambda~_eps(s) = sigma^-1 int_{sigma < |s| <= eps} |s| dLambda(s)."""
    sigma = models.sigma_eps(f, eps)
    if sigma >= eps:
        return 0.0
    return models.abs_moment(f, 1.0, sigma, eps) / sigma


@dataclass
class RenormRow:
    eps: float
    mu_eps: float
    sigma_eps: float
    b_eps: float
    mu_over_eps: float
    sigma_over_eps: float
    error: str | None = None


@dataclass
class RenormReport:
    family: ProcessFamily
    schedule: list[RenormRow] = field(default_factory=list)

    def check(self):
        """Raise CertificateFailure naming the first row that breaks an invariant."""
        rows = [r for r in self.schedule if r.error is None]
        for prev, row in zip(rows, rows[1:]):
            if not row.eps < prev.eps:
                raise CertificateFailure(f"eps not strictly decreasing at eps={row.eps:g}", row)
            if self.family.is_subordinator and not row.mu_eps < prev.mu_eps:
                raise CertificateFailure(f"mu_eps not decreasing at eps={row.eps:g}", row)
            if not row.sigma_eps < prev.sigma_eps:
                raise CertificateFailure(f"sigma_eps not decreasing at eps={row.eps:g}", row)
        for row in rows:
            if self.family.is_symmetric and row.b_eps != 0.0:
                raise CertificateFailure(f"b_eps nonzero for symmetric family at eps={row.eps:g}", row)
            if self.family.is_subordinator:
                if row.b_eps > 0:
                    raise CertificateFailure(f"b_eps positive at eps={row.eps:g}", row)
                # s^2 <= eps s on (0, eps)
                if row.sigma_eps**2 > row.eps * row.mu_eps * (1 + 1e-12):
                    raise CertificateFailure(f"sigma^2 > eps*mu at eps={row.eps:g}", row)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in self.schedule:
            w.writerow([repr(getattr(r, c)) for c in REPORT_COLUMNS])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "family": self.family.label,
            "rows": [{c: getattr(r, c) for c in REPORT_COLUMNS} | {"error": r.error} for r in self.schedule],
        }


def build_renorm_report(f: ProcessFamily, eps_schedule) -> RenormReport:
    schedule = [float(e) for e in eps_schedule]
    if not schedule:
        raise DomainError("eps schedule is empty")
    if any(not 0 < e <= 1 for e in schedule):
        raise DomainError("eps values must lie in (0, 1]")
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise DomainError("eps schedule must be strictly decreasing")
    report = RenormReport(f)
    nan = math.nan
    for eps in schedule:
        try:
            mu = models.mu_eps(f, eps) if f.is_subordinator else nan
            sigma = models.sigma_eps(f, eps)
            b = models.b_eps(f, eps)
            report.schedule.append(RenormRow(eps, mu, sigma, b, mu / eps, sigma / eps))
        except LevyError as exc:
            report.schedule.append(RenormRow(eps, nan, nan, nan, nan, nan, error=str(exc)))
    return report
