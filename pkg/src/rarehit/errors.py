"""Exception hierarchy shared by all rarehit modules."""


class RarehitError(Exception):
    """Base class for every error raised by this package."""


class EmptyAlphabetError(RarehitError):
    pass


class NonStochasticError(RarehitError):
    """A probability row does not sum to one or has negative entries."""


class PeriodicOrReducibleError(RarehitError):
    """The Markov chain is not irreducible and aperiodic."""


class SymbolOutOfRangeError(RarehitError):
    pass


class GapNonPositiveError(RarehitError):
    pass


class RankMismatchError(RarehitError):
    """Target sets of different word lengths cannot be combined."""


class ExpansionTooLargeError(RarehitError):
    """Explicit enumeration of a Hamming ball would exceed the cap."""


class HorizonNonPositiveError(RarehitError):
    pass


class HorizonTooShortError(RarehitError):
    """The tail distribution does not extend far enough for the request."""


class HorizonMismatchError(RarehitError):
    """Two tails must share a common horizon to be compared."""


class ZeroMeasureSetError(RarehitError):
    pass


class ZeroTailError(RarehitError):
    """H(s-2n) vanished; the normalizing constant is undefined."""


class EnumerationTooLargeError(RarehitError):
    """Brute-force enumeration would exceed the cap."""


class SingularSystemError(RarehitError):
    pass


class RejectionBudgetExceededError(RarehitError):
    """Conditional sampling rejected too many proposals."""


class RateExceedsEntropyError(RarehitError):
    """Cardinality growth rate of the target family is not below entropy."""


class GridEmptyError(RarehitError):
    pass


class ConfigInvalidError(RarehitError):
    """CLI configuration could not be parsed or validated."""
