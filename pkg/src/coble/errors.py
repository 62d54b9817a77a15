"""Exception types raised across the package."""


class CobleError(Exception):
    """Base class for all package errors."""


class ZeroInverse(CobleError, ZeroDivisionError):
    pass


class Inconsistent(CobleError, ValueError):
    """Linear system has no solution."""


class DimensionMismatch(CobleError, ValueError):
    pass


class OddSize(CobleError, ValueError):
    pass


class NotNested(CobleError, ValueError):
    pass


class NotDivisible(CobleError, ArithmeticError):
    """A Pfaffian fails to factor through the coordinate variable."""


class RankTooHigh(CobleError, ValueError):
    """The point is not on the rank <= 4 locus."""


class SingularSurfacePoint(CobleError, ValueError):
    pass


class KernelNotOneDim(CobleError, ValueError):
    def __init__(self, dim, message=None):
        self.dim = dim
        super().__init__(message or f"kernel dimension {dim}, expected 1")


class FieldTooLarge(CobleError, ValueError):
    pass


class DegenerateChord(CobleError, ArithmeticError):
    """A chord computation hit a non-generic configuration."""


class NotUnique(DegenerateChord):
    def __init__(self, count):
        self.count = count
        super().__init__(f"{count} candidate third points, expected exactly 1")


class ZeroContraction(CobleError, ValueError):
    pass


class MembershipFailed(CobleError, AssertionError):
    pass


class BadIntersection(CobleError, ValueError):
    pass


class UnknownLabel(CobleError, KeyError):
    pass


class SuitabilityExhausted(CobleError, RuntimeError):
    pass
