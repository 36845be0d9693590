"""Exception types raised by edgevote.

All of them derive from ValueError so callers that only guard against
bad values keep working.
"""


class EdgeVoteError(Exception):
    """Base class for edgevote errors."""


class ParameterDomainError(EdgeVoteError, ValueError):
    """A parameter lies outside the domain of the operation."""


class PreconditionError(ParameterDomainError):
    """A bound or theorem was evaluated outside its stated precondition."""

    def __init__(self, name: str, condition: str, detail: str = ""):
        self.name = name
        self.condition = condition
        message = f"{name}: precondition {condition} violated"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class CapacityError(EdgeVoteError, ValueError):
    """An exact routine was asked to exceed its enumeration or convolution limit."""


class InputError(EdgeVoteError, ValueError):
    """Malformed input file, or an example too short for the model."""
