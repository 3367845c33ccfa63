"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class PoleError(DomainError):
    """Evaluation requested exactly at a pole."""


class OutOfAnnulusError(DomainError):
    """An energy or conjugate coordinate lies outside the period annulus."""


class ParameterDomainError(DomainError):
    """Family parameters outside the admissible parameter region."""


class CapabilityError(ValueError):
    """A derivative order beyond the declared capability was requested."""


class DivergenceError(ArithmeticError):
    """An improper integral failed its integrability check."""


class NoConvergenceError(ArithmeticError):
    """An iterative estimate did not settle below its residual threshold."""


class ZeroLimitError(NoConvergenceError):
    """A fitted limit is indistinguishable from zero."""


class MomentumViolationError(ValueError):
    """A momentum that must vanish is nonzero beyond tolerance."""


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 3)."""
