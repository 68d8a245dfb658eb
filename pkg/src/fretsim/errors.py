"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent run configuration."""


class GridMismatchError(ValueError):
    """Operands live on different time grids."""


class NumericalError(RuntimeError):
    """Base class for runtime numerical failures (CLI exit code 3)."""


class IntegrationError(NumericalError):
    """Probability conservation or positivity was violated during propagation."""


class SingularGeneratorError(NumericalError):
    """The rate generator has no unique stationary distribution."""


class ResampleLimitError(NumericalError):
    """Bound resampling failed too many consecutive times; the bounds are
    incompatible with the noise scale."""


class NoBunchingError(ValueError):
    """The correlation stays at or below 1 throughout the fit window."""


class FitError(RuntimeError):
    """The tail fit could not be performed on the available points."""
