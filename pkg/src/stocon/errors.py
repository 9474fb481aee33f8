"""Exception types shared across the package."""


class StoconError(Exception):
    """Base class for all stocon-specific errors."""


class ParseError(StoconError):
    """A net, log, PNML, or XES document is malformed."""


class ValidationError(StoconError):
    """Structurally well-formed input violates a domain invariant."""


class NotEnabledError(StoconError):
    """A transition was fired at a marking where it is not enabled."""


class CapacityError(StoconError):
    """A computation exceeded its configured size bound."""


class NoAlignmentError(StoconError):
    """The final marking is unreachable; no alignment exists."""
