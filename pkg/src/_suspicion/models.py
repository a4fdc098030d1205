# This module contains the data classes shared by the agents, the alarm manager and the simulator:
# time clauses, protocol messages, deductions, and the actions agent transitions emit.
# Everything here is immutable, so states and actions can be compared, replayed and shared freely.

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Union

from _suspicion.enumerations import ClauseKind, DeductionKind, FaultKind, MessageKind, Task

if TYPE_CHECKING:
    from _suspicion.alarms import AlarmSpec


@dataclass(frozen=True)
class Clause:
    """A time-related clause, about a subject node."""

    kind: ClauseKind
    """The clause kind."""
    subject: int
    """The node the clause is about."""

    def __str__(self) -> str:
        return f"{self.kind.value}/{self.subject}"

    @property
    def alarm_id(self) -> str:
        """The identifier of the alarm managing this clause."""
        return str(self)

    @property
    def is_receive(self) -> bool:
        """Whether the clause watches for a sign of life."""
        return self.kind in {ClauseKind.MIA_RECV, ClauseKind.TAIA_RECV}


@dataclass(frozen=True)
class Message:
    """A protocol message."""

    kind: MessageKind
    """The message kind."""
    sender: int
    """The sending node."""
    task: Task
    """The sending task, D or I."""
    epoch: int
    """The sender's election generation."""
    sent_at: int
    """The tick the message was sent at."""
    coordinator: int | None = None
    """The coordinator the sender believes in (task D messages only)."""
    view: frozenset[int] | None = None
    """The coordinator's operational set (MIA only)."""

    @property
    def claim(self) -> tuple[int, int] | None:
        """The `(epoch, coordinator)` claim carried by the message, if any."""
        if self.task is not Task.D or self.coordinator is None:
            return None
        return (self.epoch, self.coordinator)

    def as_dict(self, **kwargs: Any) -> dict[str, Any]:  # noqa: ARG002
        """Return this message's data as a dictionary.

        Parameters:
            **kwargs: Additional serialization options.

        Returns:
            A dictionary.
        """
        data: dict[str, Any] = {
            "kind": self.kind,
            "sender": self.sender,
            "task": self.task,
            "epoch": self.epoch,
            "sent_at": self.sent_at,
        }
        if self.coordinator is not None:
            data["coordinator"] = self.coordinator
        if self.view is not None:
            data["view"] = self.view
        return data


@dataclass(frozen=True)
class Deduction:
    """The outcome of a suspicion period."""

    kind: DeductionKind
    """The deduction kind."""
    node: int
    """The node the deduction is about."""

    def __str__(self) -> str:
        return f"{self.kind.value}({self.node})"


def outranks(claim: tuple[int, int], other: tuple[int, int]) -> bool:
    """Tell whether a coordinator claim wins over another one.

    Later epochs win. Within an epoch, the lowest coordinator identifier wins.

    Parameters:
        claim: An `(epoch, coordinator)` pair.
        other: Another `(epoch, coordinator)` pair.

    Returns:
        Whether `claim` wins.
    """
    return claim[0] > other[0] or (claim[0] == other[0] and claim[1] < other[1])


# ========= ACTIONS ========= #
# Actions are the only externally visible effects of agent transitions.
# Whoever drives the agents (the simulator) interprets them.


@dataclass(frozen=True)
class Send:
    """Send a message to one node's task D."""

    to: int
    """The receiving node."""
    message: Message
    """The message."""


@dataclass(frozen=True)
class Broadcast:
    """Send a message to task D of every other node."""

    message: Message
    """The message."""


@dataclass(frozen=True)
class RegisterAlarm:
    """Ask the local task A to manage a clause."""

    spec: AlarmSpec
    """The alarm to register."""


@dataclass(frozen=True)
class CancelAlarm:
    """Ask the local task A to forget a clause."""

    clause: Clause
    """The clause to cancel."""


@dataclass(frozen=True)
class RestartAlarm:
    """Ask the local task A to renew a clause with a full period."""

    clause: Clause
    """The clause to renew."""


@dataclass(frozen=True)
class Deduce:
    """Report the resolution of a suspicion."""

    deduction: Deduction
    """The deduction."""


@dataclass(frozen=True)
class ReviveLocalD:
    """Task I starts reviving its crashed task D."""


@dataclass(frozen=True)
class RecoveryHook:
    """Node recovery could start here. Recovery scripts are not interpreted."""

    description: str
    """What needs recovering."""


@dataclass(frozen=True)
class Milestone:
    """A protocol milestone worth tracing."""

    text: str
    """The canonical event text."""


Action = Union[
    Send,
    Broadcast,
    RegisterAlarm,
    CancelAlarm,
    RestartAlarm,
    Deduce,
    ReviveLocalD,
    RecoveryHook,
    Milestone,
]
"""Any action an agent transition can emit."""


@dataclass(frozen=True)
class FaultSpec:
    """A fault to inject."""

    kind: FaultKind
    """The fault kind."""
    target: int
    """The targeted node (for component faults, the node hosting the component)."""
    at: int
    """The tick the fault is injected at."""
    task: Task | None = None
    """The targeted task, for component faults: D or I."""
    duration: int | None = None
    """How long a slowdown lasts, in ticks."""
    factor: int | None = None
    """Latency multiplier of a slowdown."""

    @property
    def keyword(self) -> str:
        """The script keyword of the fault kind."""
        return {
            FaultKind.CRASH_COMPONENT: "CRASH",
            FaultKind.CRASH_NODE: "CRASH",
            FaultKind.REBOOT_NODE: "REBOOT",
            FaultKind.SLOWDOWN: "SLOWDOWN",
        }[self.kind]

    @property
    def target_keyword(self) -> str:
        """The script keyword of the target."""
        if self.kind in {FaultKind.CRASH_NODE, FaultKind.REBOOT_NODE}:
            return "NODE"
        return "ICOMPONENT" if self.task is Task.I else "COMPONENT"

    def describe(self) -> str:
        """Describe the fault, without its injection time.

        Returns:
            A description like `CRASH ON COMPONENT 1`.
        """
        text = f"{self.keyword} ON {self.target_keyword} {self.target}"
        if self.kind is FaultKind.SLOWDOWN:
            text += f" FOR {self.duration} TICKS FACTOR {self.factor}"
        return text
