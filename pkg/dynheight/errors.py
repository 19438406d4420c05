"""Exceptions raised by dynheight

Mathematical refusals carry ``refusal = True``; the command-line front end
reports them with exit status 2 instead of 1."""

class DynHeightError(Exception):
    """Base class of all dynheight errors"""
    refusal = False

class DegeneratePointError(DynHeightError, ValueError):
    """A factor of a projective point has all coordinates zero"""

class OffSurfaceError(DynHeightError, ValueError):
    """A point does not satisfy the defining equations of a surface"""

class IndeterminatePointError(DynHeightError):
    """A map is not defined at the point"""

class DegenerateFiberError(DynHeightError):
    """A fiber of a double cover is not finite"""

class SingularCurveError(DynHeightError, ValueError):
    """The Weierstrass discriminant vanishes"""

class ConstructionFailedError(DynHeightError):
    """A randomized construction exhausted its retries"""

class InequalityOnlySystemError(DynHeightError):
    """The system only satisfies a height inequality, so no canonical height exists"""
    refusal = True

class DomainNotClosedError(DynHeightError, ValueError):
    """A finite domain is not closed under the maps"""

class ZeroDenominatorError(DynHeightError, ZeroDivisionError):
    """A ratio of heights is undefined"""
    refusal = True

class ExceptionalPointError(DynHeightError, ValueError):
    """The base point lies in the exceptional set"""
    refusal = True

class RootFindingError(DynHeightError):
    """Too many roots failed to converge"""

class GridTooCoarseError(DynHeightError):
    """The discrete Laplacian lost too much mass"""

class OrbitEvaluationError(DynHeightError):
    """A map failed at some node of a forward orbit"""

    def __init__(self, node, map_index, cause):
        super().__init__('map {} failed at {}: {}'.format(map_index, node, cause))
        self.node = node
        self.map_index = map_index
        self.cause = cause

class SchemaError(DynHeightError, ValueError):
    """A system description or point literal is malformed"""

    def __init__(self, message, field=None, line=None):
        where = []
        if line is not None:
            where.append('line {}'.format(line))
        if field is not None:
            where.append('field {}'.format(field))
        if where:
            message = '{}: {}'.format(', '.join(where), message)
        super().__init__(message)
        self.field = field
        self.line = line
