"""Simulation and diagnostics for Lévy-driven processes.

Subpackages by layer: ``special`` (gamma and Bessel K), ``models`` (Lévy
families, exponents, truncated moments), ``samplers`` (paths),
``renormalization`` (small-jump processes), ``sde`` (Euler solves and
stability experiments), ``diagnostics`` (statistics and certificates) and
``cli``.
"""
from .errors import (
    AcceptanceRateError,
    CertificateFailure,
    DomainError,
    LevyError,
    NumericalError,
    StepOverflowError,
    UnsupportedFamilyError,
)
from .models import ProcessFamily, char_exponent, family, laplace_exponent, levy_density
from .samplers import PathGrid, RngStream, SamplePath, sample_family

__version__ = "0.1.0"

__all__ = [
    "AcceptanceRateError",
    "CertificateFailure",
    "DomainError",
    "LevyError",
    "NumericalError",
    "PathGrid",
    "ProcessFamily",
    "RngStream",
    "SamplePath",
    "StepOverflowError",
    "UnsupportedFamilyError",
    "char_exponent",
    "family",
    "laplace_exponent",
    "levy_density",
    "sample_family",
]
