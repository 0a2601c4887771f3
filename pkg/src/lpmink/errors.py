"""Exception hierarchy shared by all modules."""


class LpMinkError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LpMinkError, ValueError):
    """An argument lies outside the domain of an operation."""


class UnsupportedExponentError(LpMinkError, ValueError):
    """The exponent p is outside the supported range p < 1."""


class ParameterError(LpMinkError, ValueError):
    """A parameter record violates its invariants."""


class SingularityError(LpMinkError, ValueError):
    """A derivative was requested at a singular point."""


class ProblemError(LpMinkError, ValueError):
    """An L_p problem instance is malformed (e.g. non-spanning normals)."""


class MeshingError(LpMinkError, ValueError):
    """A mesh specification cannot produce the requested body."""


class SchemaError(LpMinkError, ValueError):
    """Input data does not match the expected JSON layout."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
