"""Numerical laboratory for the period function of planar potential centers."""

from . import asymptotics, cli, families, operators, period, potential, quadrature, series, specfun
from .errors import (
    CapabilityError,
    ConfigError,
    DivergenceError,
    DomainError,
    MomentumViolationError,
    NoConvergenceError,
    OutOfAnnulusError,
    ParameterDomainError,
    PoleError,
    ZeroLimitError,
)

__all__ = [
    "asymptotics",
    "cli",
    "families",
    "operators",
    "period",
    "potential",
    "quadrature",
    "series",
    "specfun",
    "CapabilityError",
    "ConfigError",
    "DivergenceError",
    "DomainError",
    "MomentumViolationError",
    "NoConvergenceError",
    "OutOfAnnulusError",
    "ParameterDomainError",
    "PoleError",
    "ZeroLimitError",
]

__version__ = "0.1.0"
