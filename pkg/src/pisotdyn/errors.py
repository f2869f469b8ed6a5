"""Exception hierarchy shared by every module of the package."""


class PisotDynError(Exception):
    """Base class for all errors raised by pisotdyn."""


# number fields
class NotMonic(PisotDynError):
    pass


class Reducible(PisotDynError):
    pass


class NoRootInInterval(PisotDynError):
    pass


class RootNotGreaterThanOne(PisotDynError):
    pass


class FieldMismatch(PisotDynError):
    pass


class FieldDivisionByZero(PisotDynError, ZeroDivisionError):
    pass


class RefinementBudgetExceeded(PisotDynError):
    pass


class EmptySet(PisotDynError, ValueError):
    pass


# maps
class PartitionGap(PisotDynError):
    pass


class PartitionOverlap(PisotDynError):
    pass


class ImageEscapes(PisotDynError):
    pass


class LengthMismatch(PisotDynError, ValueError):
    pass


class BadIdentity(PisotDynError, ValueError):
    pass


class BadArrangement(PisotDynError, ValueError):
    pass


class TOutOfRange(PisotDynError, ValueError):
    pass


class BetaOutOfRange(PisotDynError, ValueError):
    pass


class OutOfDomain(PisotDynError, ValueError):
    pass


class NoSidedNeighborhood(PisotDynError, ValueError):
    pass


# orbits
class BudgetExceeded(PisotDynError):
    """Raised when period detection runs out of steps.

    ``bound`` carries the a-priori lattice bound (or None when the field is
    not Pisot) so the caller can raise the budget.
    """

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class PrecisionExhausted(PisotDynError):
    pass


class EmptyOrbit(PisotDynError, ValueError):
    pass


# discreteness
class NotPisot(PisotDynError):
    pass


class GapViolation(PisotDynError):
    pass


# density
class SampleOnBreakpoint(PisotDynError, ValueError):
    pass


class BetaBelowTwo(PisotDynError):
    pass


# equivalence
class OffsetOutsideWindow(PisotDynError):
    pass


class EmptyWindow(PisotDynError, ValueError):
    pass


# input parsing
class ParseError(PisotDynError, ValueError):
    pass
