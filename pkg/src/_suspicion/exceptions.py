# This module contains all the exceptions specific to Suspicion.

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence


class SuspicionError(Exception):
    """The base exception for all Suspicion errors."""


class ConfigError(SuspicionError):
    """Exception for invalid configuration scripts or values."""

    def __init__(self, message: str, *, lineno: int | None = None, violations: Sequence[str] = ()) -> None:
        """Initialize the exception.

        Parameters:
            message: The error message.
            lineno: The line of the configuration script, if any.
            violations: The violated inequalities, if any.
        """
        self.lineno: int | None = lineno
        """The line number the error was found on (when parsing)."""
        self.violations: tuple[str, ...] = tuple(violations)
        """The violated inequalities (when validating)."""

        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class AlarmError(SuspicionError):
    """Base class for errors raised by alarm managers."""


class DuplicateAlarmError(AlarmError):
    """Exception raised when registering an alarm whose identifier is still live."""


class UnknownAlarmError(AlarmError):
    """Exception raised when an alarm identifier does not name a live alarm."""


class AlarmStateError(AlarmError):
    """Exception raised when an alarm is not in the state an operation requires."""


class FaultScriptError(SuspicionError):
    """Exception for syntax errors in fault injection scripts."""

    def __init__(self, message: str, lineno: int) -> None:
        """Initialize the exception.

        Parameters:
            message: The error message.
            lineno: The line the error was found on.
        """
        self.lineno: int = lineno
        """The line number the error was found on."""
        super().__init__(f"line {lineno}: {message}")


class AgentError(SuspicionError):
    """Exception raised when an agent transition receives an input it cannot handle."""


class ElectionError(AgentError):
    """Exception raised when no successor can be elected."""


class SimulationError(SuspicionError):
    """Base class for errors raised by the simulator."""


class FaultTargetError(SimulationError):
    """Exception raised when a fault targets an unknown node or component."""
