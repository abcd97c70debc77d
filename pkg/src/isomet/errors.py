"""Exception hierarchy shared across the package."""


class IsometError(Exception):
    """Base class for all library errors."""


class GeometryError(IsometError, ValueError):
    """Invalid point, dimension mismatch or ill-posed geometric operation."""


class NotPositiveDefiniteError(GeometryError):
    pass


class CutLocusError(GeometryError):
    """The logarithm is undefined because the target lies in the cut locus."""


class SingularResultError(GeometryError):
    """A map produced a matrix that left the positive definite cone."""


class NonUniqueMeanError(IsometError, ValueError):
    """The empirical Frechet function has several global minimizers."""


class DegenerateStatisticError(IsometError, ValueError):
    pass
