"""Exception types shared across the package."""
from __future__ import annotations


class MixplanError(Exception):
    """Base class for all package-specific errors."""


class LtlSyntaxError(MixplanError):
    """Raised on malformed formula text; carries the offending position."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at column {position})")
        self.position = position


class ScenarioError(MixplanError):
    """Raised when a scenario file fails schema or consistency validation."""


class NoAcceptingRun(MixplanError):
    """No prefix-suffix run with finite cost exists from the given roots."""


class NoFeasibleInsertion(MixplanError):
    """Every candidate detour pair for a temporary task has infinite cost."""


class TraceLiftError(MixplanError):
    """A recorded region trace admits no consistent product run."""
