"""Exception types raised by doakit operations."""


class DoakitError(Exception):
    """Base class for all doakit errors."""


class AngleDomainError(DoakitError, ValueError):
    """An angle lies outside the supported (-90, 90) degree domain."""


class PartitionError(DoakitError, ValueError):
    """Requested subarray partition does not tile the array exactly."""


class ConditioningError(DoakitError, ArithmeticError):
    """A manifold or Fisher matrix is numerically too ill-conditioned to use."""


class GridSizeError(DoakitError, ValueError):
    """A requested exhaustive search would enumerate too many candidates."""


class RootDegeneracyError(DoakitError, ArithmeticError):
    """Polynomial rooting produced fewer admissible roots than sources."""


class ArcsinDomainError(DoakitError, ArithmeticError):
    """A polynomial root maps outside the arcsine domain."""


class ValidationError(DoakitError, ValueError):
    """Structured input (weights, files, manifests) failed validation."""


class PipelineError(DoakitError, RuntimeError):
    """A multi-stage estimator lost every usable intermediate result."""
