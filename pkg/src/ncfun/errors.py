"""Exception hierarchy shared by all modules."""


class NcError(Exception):
    """Base class for every error raised by ncfun."""


class DimensionError(NcError, ValueError):
    """Operands have incompatible shapes or variable counts."""


class SingularMatrixError(NcError, ArithmeticError):
    """A matrix is singular to working precision.

    Attributes
    ----------
    pivot : float
        Magnitude of the smallest LU pivot.
    threshold : float
        The threshold the pivot fell below.
    where : str or None
        Optional description of the offending subexpression.
    """

    def __init__(self, message, pivot=0.0, threshold=0.0, where=None):
        super().__init__(message)
        self.pivot = float(pivot)
        self.threshold = float(threshold)
        self.where = where


class ZeroSetError(SingularMatrixError):
    """The point lies on the determinantal zero set of the function."""


class PencilSingularError(SingularMatrixError):
    """The pencil L(X) of a realization is singular at the point."""


class ParseError(NcError, ValueError):
    """Syntax error in an expression string, with 1-based line/column."""

    def __init__(self, message, line=1, col=1):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class StructureError(NcError, ValueError):
    """Malformed AST, e.g. a ragged matricial grid."""


class UnsupportedError(NcError, ValueError):
    """Operation not supported for this kind of input."""


class DegenerateError(NcError, ValueError):
    """Expression failed the nondegeneracy probe."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DomainExitError(NcError, ArithmeticError):
    """A path leaves the domain (or hits a singularity) at parameter ``t``."""

    def __init__(self, message, t=None):
        super().__init__(message if t is None else f"{message} at t={t:.17g}")
        self.t = t


class EndpointMismatchError(NcError, ValueError):
    """Paths do not share the required essential endpoints."""


class ClosednessError(NcError, ValueError):
    """A candidate closed form failed the symmetry test."""
