"""Exception types shared across the package."""


class SaddlekitError(Exception):
    """Base class for all library errors."""


class SingularSystem(SaddlekitError):
    """A shifted linear system had a pivot below the singularity threshold."""


class DimensionMismatch(SaddlekitError):
    """Vector/matrix/domain dimensions do not agree."""


class NonFiniteValue(SaddlekitError):
    """An oracle returned NaN or Inf."""


class BadParams(SaddlekitError):
    """Invalid construction or configuration parameters."""


class BadStepSize(SaddlekitError):
    """Extragradient step size outside (0, 1/ell)."""


class NoConvergence(SaddlekitError):
    """An inner iteration hit its cap before reaching its tolerance."""


class NoProgress(SaddlekitError):
    """The bracketing multiplier left the representable range."""


class ConfigError(SaddlekitError):
    """Malformed run configuration."""


class DegenerateFit(SaddlekitError):
    """Least-squares slope fit over points with identical abscissae."""


class SlopeNeedsThreePoints(SaddlekitError):
    """Slope fitting requires at least three grid points."""
