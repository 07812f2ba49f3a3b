# ---------------------------------------------------------------------
# Gufo Three-Stage: Errors
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""
Exception hierarchy.

All errors are derived from `ThreeStageError`. Value-related errors
are also `ValueError` subclasses.
"""

# Python modules
from dataclasses import dataclass
from typing import Iterable, List


class ThreeStageError(Exception):
    """Base class for all Gufo Three-Stage errors."""


class InvalidKeyError(ThreeStageError, ValueError):
    """Key parameters violate the family invariants."""


class IncompatiblePayloadError(ThreeStageError, ValueError):
    """Payload cannot be processed by the given key or operation."""


class FamilyMismatchError(ThreeStageError, ValueError):
    """Keys belong to different families or have different parameters."""


class NonCommutingKeysError(ThreeStageError, ValueError):
    """Keys failed the commutation check."""


class TopologyError(ThreeStageError, ValueError):
    """Topology is unsuitable for the requested operation."""


class UnknownLocationError(TopologyError, KeyError):
    """Location id is not found in the topology."""

    def __str__(self: "UnknownLocationError") -> str:
        """Do not quote the message like KeyError does."""
        return str(self.args[0]) if self.args else ""


class UnrecoverableError(ThreeStageError, ValueError):
    """Not enough shares to reconstruct the payload."""


class AttackError(ThreeStageError, ValueError):
    """Attack is not applicable to the given observations."""


@dataclass(frozen=True)
class ConfigIssue(object):
    """
    Single configuration problem.

    Args:
        line: 1-based line number, 0 when unknown.
        message: Human-readable description.
    """

    line: int
    message: str

    def __str__(self: "ConfigIssue") -> str:
        """Format as `line N: message`."""
        if self.line:
            return f"line {self.line}: {self.message}"
        return self.message


class ConfigError(ThreeStageError, ValueError):
    """
    Scenario configuration is invalid.

    Args:
        issues: All problems found.
    """

    def __init__(self: "ConfigError", issues: Iterable[ConfigIssue]) -> None:
        self.issues: List[ConfigIssue] = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))
