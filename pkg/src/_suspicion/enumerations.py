# This module contains all the enumerations of the package.

from __future__ import annotations

from enum import Enum


class Role(str, Enum):
    """Enumeration of the roles an agent can play."""

    COORDINATOR: str = "coordinator"
    """The manager of the backbone. One per correct state."""
    ASSISTANT: str = "assistant"
    """A backup agent, monitoring the coordinator."""


class Task(str, Enum):
    """Enumeration of the tasks of a node."""

    D: str = "D"
    """The protocol (database) task."""
    I: str = "I"  # noqa: E741
    """The "I'm alive" watchdog task."""
    A: str = "A"
    """The alarm manager task, which also delivers fault injections."""
    NET: str = "NET"
    """The network. Messages it discards are recorded under this task, in verbose traces."""


class MessageKind(str, Enum):
    """Enumeration of protocol message kinds."""

    MIA: str = "MIA"
    """Manager is alive: coordinator heartbeat."""
    TAIA: str = "TAIA"
    """This assistant is alive: assistant heartbeat."""
    TEIF: str = "TEIF"
    """This entity is faulty: sent by task I about its own task D."""
    EVENT_NOTIFY: str = "EVENT_NOTIFY"
    """Application event notification, carrying a piggybacked heartbeat."""
    HELLO: str = "HELLO"
    """Sign of life of a (re)started task D."""
    HELLO_BACK: str = "HELLO_BACK"
    """Reply carrying the current epoch and coordinator."""


class ClauseKind(str, Enum):
    """Enumeration of the time clauses managed by task A."""

    MIA_SEND: str = "MIA_SEND"
    """Coordinator: time to send a MIA to the subject."""
    MIA_RECV: str = "MIA_RECV"
    """Assistant: no sign of life from the coordinator for a whole period."""
    TAIA_SEND: str = "TAIA_SEND"
    """Assistant: time to send a TAIA to the coordinator."""
    TAIA_RECV: str = "TAIA_RECV"
    """Coordinator: no sign of life from the subject assistant for a whole period."""
    IM_ALIVE_SET: str = "IM_ALIVE_SET"
    """Task D: time to set the "I'm alive" flag."""
    IM_ALIVE_CLEAR: str = "IM_ALIVE_CLEAR"
    """Task I: time to check and clear the "I'm alive" flag."""
    TEIF_RECV: str = "TEIF_RECV"
    """The suspicion period about the subject is over."""
    HELLO_SEND: str = "HELLO_SEND"
    """Lonely coordinator: time to probe the other nodes."""


class DeductionKind(str, Enum):
    """Enumeration of the possible outcomes of a suspicion period."""

    AGENT_CRASHED_NODE_ALIVE: str = "AgentCrashedNodeAlive"
    """Task I of the node reported its task D as faulty."""
    AGENT_SLOWED_DOWN: str = "AgentSlowedDown"
    """A late sign of life arrived."""
    NODE_CRASHED: str = "NodeCrashed"
    """Nothing arrived from the node during the whole suspicion period."""


class FaultKind(str, Enum):
    """Enumeration of injectable faults."""

    CRASH_COMPONENT: str = "crash-component"
    """Crash one task of a node."""
    CRASH_NODE: str = "crash-node"
    """Crash all the tasks of a node."""
    SLOWDOWN: str = "slowdown"
    """Multiply the latency of the messages a component sends."""
    REBOOT_NODE: str = "reboot-node"
    """Crash a node and reboot it."""


class ElectionStrategy(str, Enum):
    """Enumeration of successor election strategies."""

    SKIP: str = "SKIP"
    """First operational node after the failed coordinator, modulo n."""
    NAIVE: str = "NAIVE"
    """Always the node after the failed coordinator, modulo n."""


class TraceFormat(str, Enum):
    """Enumeration of trace output formats."""

    TEXT: str = "text"
    """Tab-separated lines."""
    JSON: str = "json"
    """One JSON object per line."""
