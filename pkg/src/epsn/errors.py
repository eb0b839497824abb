"""Exception hierarchy shared by all modules."""


class EpsnError(Exception):
    """Base class for every error raised by this package."""


class SingularPoint(EpsnError):
    """The map is undefined at the given point (it lies in the singular set)."""


class SingularOrbit(EpsnError):
    """An orbit segment passes through the singular set before its last point."""


class HorizonExhausted(EpsnError):
    """A finite symbolic word ran out of symbols."""


class NotInImage(EpsnError):
    pass


class InvalidSystem(EpsnError):
    pass


class InvalidPoint(EpsnError):
    pass


class EmptyCandidateSet(EpsnError):
    pass


class BudgetExceeded(EpsnError):
    """Branch-and-bound stopped before proving optimality.

    ``incumbent`` holds the best separated set found so far.
    """

    def __init__(self, message, incumbent=None):
        super().__init__(message)
        self.incumbent = incumbent


class MismatchedParameters(EpsnError):
    pass


class MonotonicityViolation(EpsnError):
    pass


class InsufficientData(EpsnError):
    pass


class NotOptimal(EpsnError):
    pass


class SingularAtom(EpsnError):
    pass


class OverlappingParts(EpsnError):
    pass


class UnsupportedSystem(EpsnError):
    pass


class NotPrimitive(EpsnError):
    pass


class NoConvergence(EpsnError):
    pass


class InadmissibleWord(EpsnError):
    pass


class ConfigError(EpsnError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
