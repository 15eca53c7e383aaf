"""Exception hierarchy shared by every module."""


class DGLMError(Exception):
    """Base class for all package errors."""


class DomainError(DGLMError, ValueError):
    """Argument outside the mathematical domain of a function."""


class StructuralError(DGLMError, ValueError):
    """Inconsistent dimensions, lengths or empty inputs."""


class DegeneratePredictorError(DGLMError, ValueError):
    """Linear predictor variance is not strictly positive."""


class ObservationError(DGLMError, ValueError):
    """Observation outside the support of the response family."""


class ConjugateDomainError(DGLMError, ValueError):
    """Moment matching produced conjugate parameters outside their domain."""


class UnsupportedCapabilityError(DGLMError, NotImplementedError):
    """The family does not provide the requested operation."""


class ContextError(DGLMError, ValueError):
    """A required observation-context field is missing or invalid."""
