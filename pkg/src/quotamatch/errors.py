"""Exception types shared by all solver modules."""


class MatchingError(Exception):
    """Base class for all quotamatch errors."""


class RejectedInputError(MatchingError):
    """Input references unknown ids, is malformed, or violates a precondition."""


class WrongVariantError(MatchingError):
    """A solver was called on an instance shape it does not handle."""


class NotApplicableError(MatchingError):
    """The quota-two solver was called with some lower quota >= 3."""


class EnumerationOverflowError(MatchingError):
    """Brute-force enumeration would exceed its cap."""


class SolverBudgetError(MatchingError):
    """The naive integer solver exceeded its search budget."""


class InternalInvariantError(MatchingError):
    """A state the theory rules out was reached; indicates a bug."""
