"""Exception hierarchy shared by all modules."""


class AccessibilityError(Exception):
    """Base class for library errors."""


class DomainError(AccessibilityError, ValueError):
    """Input violates an operation's precondition."""


class OracleError(AccessibilityError):
    """A neighbour oracle or morphism misbehaved (asymmetry, undefined image)."""


class BudgetError(AccessibilityError):
    """A word budget or exploration cap was exhausted before an answer was certain."""


class ResolutionError(AccessibilityError):
    """End proxies are too coarse for the separator under inspection."""


class SpecError(DomainError):
    """The data describing an amalgam is inconsistent."""


class NotGeneratedError(AccessibilityError):
    """A separation has no decomposition into tight separations of bounded order."""


class ParseError(DomainError):
    """A document does not match its schema; ``pointer`` locates the offending value."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
