# This module contains the per-node agent state machines.
#
# Task D runs the protocol: it heartbeats, suspects, deduces, elects and reintegrates.
# Task I watches the "I'm alive" flag of task D, and reports its own task D as faulty
# when the flag was not set during a whole period.
#
# Transitions are pure functions: they take a state and an input,
# and return a new state along with the actions to perform.
# They never perform any I/O themselves.

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

from _suspicion.alarms import AlarmSpec
from _suspicion.enumerations import ClauseKind, DeductionKind, ElectionStrategy, MessageKind, Role, Task
from _suspicion.exceptions import AgentError, ElectionError
from _suspicion.logger import logger
from _suspicion.models import (
    Broadcast,
    CancelAlarm,
    Clause,
    Deduce,
    Deduction,
    Message,
    Milestone,
    RecoveryHook,
    RegisterAlarm,
    RestartAlarm,
    ReviveLocalD,
    Send,
    outranks,
)

if TYPE_CHECKING:
    from collections.abc import Iterable

    from _suspicion.alarms import FiredAlarm
    from _suspicion.config import ValidatedConfig
    from _suspicion.models import Action


_PERIODS: dict[ClauseKind, str] = {
    ClauseKind.MIA_SEND: "mia_send",
    ClauseKind.MIA_RECV: "mia_recv",
    ClauseKind.TAIA_SEND: "taia_send",
    ClauseKind.TAIA_RECV: "taia_recv",
    ClauseKind.IM_ALIVE_SET: "im_alive_set",
    ClauseKind.IM_ALIVE_CLEAR: "im_alive_clear",
    ClauseKind.TEIF_RECV: "teif_recv",
    ClauseKind.HELLO_SEND: "mia_send",
}

_COORDINATOR_CLAUSES = frozenset({ClauseKind.MIA_SEND, ClauseKind.TAIA_RECV, ClauseKind.HELLO_SEND})
_ASSISTANT_CLAUSES = frozenset({ClauseKind.TAIA_SEND, ClauseKind.MIA_RECV})


@dataclass(frozen=True)
class AgentState:
    """The state of an agent: its task D, and the flags task I shares with it."""

    me: int
    """The node hosting the agent."""
    config: ValidatedConfig
    """The backbone configuration."""
    role: Role
    """The role of task D."""
    epoch: int
    """The election generation."""
    coordinator: int
    """The coordinator task D believes in."""
    operational: frozenset[int]
    """The nodes believed alive, including this one."""
    suspected: frozenset[int] = frozenset()
    """The nodes in a suspicion period."""
    clauses: frozenset[Clause] = frozenset()
    """The clauses task A manages for task D."""
    im_alive_flag: bool = True
    """The "I'm alive" flag shared by tasks D and I."""
    im_alive_seen: bool = True
    """Whether task I found the flag set at its last check."""
    reviving: bool = False
    """Whether task I is reviving task D."""
    crashed: bool = False
    """Whether task D crashed."""

    def sus(self, node: int) -> bool:
        """Tell whether a node is suspected.

        Parameters:
            node: The node.

        Returns:
            Whether the node is in a suspicion period.
        """
        return node in self.suspected

    @property
    def alarm_ids(self) -> dict[Clause, str]:
        """The alarm identifiers of task D's clauses."""
        return {clause: clause.alarm_id for clause in self.clauses}

    @property
    def claim(self) -> tuple[int, int]:
        """The `(epoch, coordinator)` pair this agent believes in."""
        return (self.epoch, self.coordinator)

    @property
    def is_coordinator(self) -> bool:
        """Whether task D is the coordinator."""
        return self.role is Role.COORDINATOR


class _Transition:
    # Accumulates state changes and actions during one transition.

    def __init__(self, state: AgentState, now: int) -> None:
        self.state = state
        self.now = now
        self.actions: list[Action] = []

    def update(self, **changes: object) -> None:
        self.state = replace(self.state, **changes)  # type: ignore[arg-type]

    def emit(self, action: Action) -> None:
        self.actions.append(action)

    def register(self, clause: Clause, *, cyclic: bool = True, target_task: Task = Task.D) -> None:
        if target_task is Task.D:
            if clause in self.state.clauses:
                return
            self.update(clauses=self.state.clauses | {clause})
        period = getattr(self.state.config, _PERIODS[clause.kind])
        self.emit(RegisterAlarm(AlarmSpec(clause.alarm_id, clause, period, cyclic=cyclic, target_task=target_task)))

    def cancel(self, clause: Clause) -> None:
        if clause in self.state.clauses:
            self.update(clauses=self.state.clauses - {clause})
            self.emit(CancelAlarm(clause))

    def cancel_kinds(self, kinds: Iterable[ClauseKind]) -> None:
        kinds = set(kinds)
        for clause in sorted(self.state.clauses, key=str):
            if clause.kind in kinds:
                self.cancel(clause)

    def restart(self, clause: Clause) -> None:
        if clause in self.state.clauses:
            self.emit(RestartAlarm(clause))

    def message(self, kind: MessageKind, *, view: frozenset[int] | None = None) -> Message:
        state = self.state
        return Message(kind, state.me, Task.D, state.epoch, self.now, coordinator=state.coordinator, view=view)

    def send(self, to: int, kind: MessageKind) -> None:
        self.emit(Send(to, self.message(kind)))

    def result(self) -> tuple[AgentState, list[Action]]:
        return self.state, self.actions


# ========= ELECTION ========= #


def elect_successor(
    operational: Iterable[int],
    failed_coordinator: int,
    n: int,
    strategy: ElectionStrategy = ElectionStrategy.SKIP,
) -> int:
    """Elect the successor of a failed coordinator.

    With the skip strategy, this is the first operational node after the failed one, modulo `n`.
    The naive strategy always elects the node right after the failed one, alive or not.

    Examples:
        >>> elect_successor({1, 2, 3}, 0, 4)
        1
        >>> elect_successor({2, 3}, 0, 4)
        2

    Parameters:
        operational: The nodes believed alive.
        failed_coordinator: The failed coordinator.
        n: The number of nodes.
        strategy: The election strategy.

    Raises:
        ElectionError: When no operational node remains.

    Returns:
        The elected node.
    """
    candidates = set(operational) - {failed_coordinator}
    if not candidates:
        raise ElectionError(f"no operational node left to succeed coordinator {failed_coordinator}")
    if strategy is ElectionStrategy.NAIVE:
        return (failed_coordinator + 1) % n
    for offset in range(1, n):
        candidate = (failed_coordinator + offset) % n
        if candidate in candidates:
            return candidate
    raise ElectionError(f"no operational node in 0..{n - 1} to succeed coordinator {failed_coordinator}")


def _sync_probe(t: _Transition) -> None:
    # A coordinator alone in its view keeps probing the others.
    state = t.state
    probe = Clause(ClauseKind.HELLO_SEND, state.me)
    lonely = state.is_coordinator and state.config.ams_enabled and state.operational == {state.me}
    if lonely:
        t.register(probe)
    else:
        t.cancel(probe)


def _register_coordinator_clauses(t: _Transition, node: int) -> None:
    t.register(Clause(ClauseKind.MIA_SEND, node))
    t.register(Clause(ClauseKind.TAIA_RECV, node))


def _register_assistant_clauses(t: _Transition, coordinator: int) -> None:
    t.register(Clause(ClauseKind.TAIA_SEND, coordinator))
    t.register(Clause(ClauseKind.MIA_RECV, coordinator))


def _become_coordinator(t: _Transition, epoch: int) -> None:
    state = t.state
    t.cancel_kinds(_ASSISTANT_CLAUSES)
    t.update(role=Role.COORDINATOR, coordinator=state.me, epoch=epoch, operational=state.operational | {state.me})
    for node in sorted(t.state.operational - {state.me}):
        _register_coordinator_clauses(t, node)
    t.emit(Milestone(f"ELECTED epoch={epoch}"))
    _sync_probe(t)


def _follow(t: _Transition, coordinator: int, epoch: int) -> None:
    # Monitor a new coordinator, as an assistant.
    state = t.state
    if state.is_coordinator:
        t.cancel_kinds(_COORDINATOR_CLAUSES)
        t.update(role=Role.ASSISTANT)
        t.emit(Milestone(f"DEMOTED coordinator={coordinator} epoch={epoch}"))
    elif coordinator != state.coordinator:
        t.cancel(Clause(ClauseKind.TAIA_SEND, state.coordinator))
        t.cancel(Clause(ClauseKind.MIA_RECV, state.coordinator))
        t.emit(Milestone(f"FOLLOW {coordinator} epoch={epoch}"))
    t.update(coordinator=coordinator, epoch=epoch, operational=t.state.operational | {coordinator})
    _register_assistant_clauses(t, coordinator)


def _elect(t: _Transition, failed: int) -> None:
    state = t.state
    epoch = state.epoch + 1
    successor = elect_successor(state.operational, failed, state.config.nodes, state.config.election)
    if successor == state.me:
        _become_coordinator(t, epoch)
    else:
        _follow(t, successor, epoch)


def _adopt(t: _Transition, claim: tuple[int, int]) -> None:
    # Adopt a claim outranking ours.
    epoch, coordinator = claim
    state = t.state
    previous = state.coordinator
    if coordinator == state.me:
        if state.is_coordinator:
            t.update(epoch=epoch)
        else:
            _become_coordinator(t, epoch)
        return
    _follow(t, coordinator, epoch)
    if (
        not state.is_coordinator
        and previous not in {coordinator, state.me}
        and previous in t.state.operational
        and previous not in t.state.suspected
    ):
        t.send(previous, MessageKind.HELLO_BACK)
    _sync_probe(t)


def _drop(t: _Transition, node: int) -> None:
    # Forget a node: it leaves the operational set and nothing monitors it anymore.
    t.update(operational=t.state.operational - {node}, suspected=t.state.suspected - {node})
    for kind in (ClauseKind.MIA_SEND, ClauseKind.TAIA_RECV, ClauseKind.TAIA_SEND, ClauseKind.MIA_RECV):
        t.cancel(Clause(kind, node))


def _receive_clause(state: AgentState, node: int) -> Clause | None:
    if state.is_coordinator:
        return Clause(ClauseKind.TAIA_RECV, node)
    if node == state.coordinator:
        return Clause(ClauseKind.MIA_RECV, node)
    return None


def _check_alive(state: AgentState) -> None:
    if state.crashed:
        raise AgentError(f"task D of node {state.me} crashed")


# ========= TRANSITIONS ========= #


def init_agent(me: int, config: ValidatedConfig) -> tuple[AgentState, list[Action]]:
    """Initialize the agent of a node.

    Parameters:
        me: The node hosting the agent.
        config: The backbone configuration.

    Raises:
        AgentError: When the node is not part of the backbone.

    Returns:
        The initial state, and the alarm registrations of task D and task I.
    """
    if not 0 <= me < config.nodes:
        raise AgentError(f"node {me} is not in 0..{config.nodes - 1}")
    role = Role.COORDINATOR if me == config.coordinator else Role.ASSISTANT
    state = AgentState(me, config, role, 0, config.coordinator, frozenset(range(config.nodes)))
    t = _Transition(state, 0)
    if not config.ams_enabled:
        return t.result()
    if role is Role.COORDINATOR:
        for node in sorted(state.operational - {me}):
            _register_coordinator_clauses(t, node)
    else:
        _register_assistant_clauses(t, config.coordinator)
    # Registered first, the clear clause fires before a set clause due at the same tick,
    # and judges the period that just elapsed.
    t.register(Clause(ClauseKind.IM_ALIVE_CLEAR, me), target_task=Task.I)
    t.register(Clause(ClauseKind.IM_ALIVE_SET, me))
    return t.result()


def rejoin_agent(
    me: int,
    config: ValidatedConfig,
    prior: AgentState | None = None,
    *,
    now: int = 0,
) -> tuple[AgentState, list[Action]]:
    """Restart task D of a node, and announce it to the others.

    Without a prior state, the whole node rebooted and the agent starts over.
    With a prior state, task I revived its task D: task D starts as a fresh assistant,
    but the epoch and operational set known on the node are kept, as well as task I's own state.

    Parameters:
        me: The node hosting the agent.
        config: The backbone configuration.
        prior: The state of the crashed task D, if the node did not reboot.
        now: The current tick.

    Returns:
        The new state, and its actions (alarm registrations, and a HELLO broadcast).
    """
    if prior is None:
        state, actions = init_agent(me, config)
        t = _Transition(state, now)
        t.actions = actions
    else:
        operational = prior.operational | {me}
        coordinator = prior.coordinator
        if coordinator == me and operational != {me}:
            coordinator = elect_successor(operational, me, config.nodes, config.election)
        state = AgentState(
            me,
            config,
            Role.COORDINATOR if coordinator == me else Role.ASSISTANT,
            prior.epoch,
            coordinator,
            operational | {coordinator},
            im_alive_seen=prior.im_alive_seen,
        )
        t = _Transition(state, now)
        if config.ams_enabled:
            if state.is_coordinator:
                _sync_probe(t)
            else:
                _register_assistant_clauses(t, coordinator)
            t.register(Clause(ClauseKind.IM_ALIVE_SET, me))
    if config.ams_enabled:
        t.emit(Broadcast(t.message(MessageKind.HELLO)))
    return t.result()


def become_coordinator(state: AgentState, epoch: int | None = None) -> tuple[AgentState, list[Action]]:
    """Take over the role of coordinator.

    Assistant clauses are replaced by the coordinator clauses about every other operational node.

    Parameters:
        state: The agent state.
        epoch: The new epoch. By default, the next one.

    Returns:
        The new state, and its actions.
    """
    _check_alive(state)
    t = _Transition(state, 0)
    _become_coordinator(t, state.epoch + 1 if epoch is None else epoch)
    return t.result()


def on_alarm(state: AgentState, fired: FiredAlarm) -> tuple[AgentState, list[Action]]:
    """Handle the expiry of one of task D's clauses.

    Parameters:
        state: The agent state.
        fired: The elapsed alarm.

    Raises:
        AgentError: When task D crashed, or when the clause is not one of task D's.

    Returns:
        The new state, and its actions.
    """
    _check_alive(state)
    clause = fired.clause
    if clause not in state.clauses:
        raise AgentError(f"node {state.me}: clause {clause} is not managed for task D")
    t = _Transition(state, fired.fired_at)
    subject = clause.subject
    kind = clause.kind

    if kind is ClauseKind.MIA_SEND:
        t.emit(Send(subject, t.message(MessageKind.MIA, view=state.operational)))
    elif kind is ClauseKind.TAIA_SEND:
        t.send(state.coordinator, MessageKind.TAIA)
    elif kind is ClauseKind.IM_ALIVE_SET:
        t.update(im_alive_flag=True)
    elif kind is ClauseKind.HELLO_SEND:
        t.emit(Broadcast(t.message(MessageKind.HELLO)))
    elif clause.is_receive:
        if subject not in state.suspected:
            t.update(suspected=state.suspected | {subject})
            t.emit(Milestone(f"SUSPECT {subject}"))
            t.register(Clause(ClauseKind.TEIF_RECV, subject), cyclic=False)
    elif kind is ClauseKind.TEIF_RECV:
        # One-shot: task A already forgot it.
        t.update(clauses=state.clauses - {clause})
        was_coordinator = subject == state.coordinator and not state.is_coordinator
        _drop(t, subject)
        t.emit(Deduce(Deduction(DeductionKind.NODE_CRASHED, subject)))
        t.emit(RecoveryHook(f"node {subject}"))
        if was_coordinator:
            _elect(t, subject)
        _sync_probe(t)
    else:
        raise AgentError(f"node {state.me}: task D does not handle {kind.value} clauses")
    return t.result()


def _on_teif(t: _Transition, node: int) -> None:
    state = t.state
    relevant = node in state.suspected or (
        node in state.operational and (state.is_coordinator or node == state.coordinator)
    )
    if not relevant:
        logger.node(state.me).debug("ignoring TEIF about node %s", node)
        return
    if node in state.suspected:
        t.cancel(Clause(ClauseKind.TEIF_RECV, node))
    else:
        t.emit(Milestone(f"SUSPECT {node}"))
    was_coordinator = node == state.coordinator and not state.is_coordinator
    _drop(t, node)
    t.emit(Deduce(Deduction(DeductionKind.AGENT_CRASHED_NODE_ALIVE, node)))
    if was_coordinator:
        _elect(t, node)
    _sync_probe(t)


def on_message(state: AgentState, message: Message, now: int) -> tuple[AgentState, list[Action]]:
    """Handle a message received by task D.

    Every message from task D of another node is a sign of life of its sender.

    Parameters:
        state: The agent state.
        message: The received message.
        now: The current tick.

    Raises:
        AgentError: When task D crashed.

    Returns:
        The new state, and its actions.
    """
    _check_alive(state)
    t = _Transition(state, now)
    sender = message.sender
    if sender == state.me:
        return t.result()

    if message.task is Task.I:
        if message.kind is MessageKind.TEIF:
            _on_teif(t, sender)
        else:
            logger.node(state.me).warning("unexpected %s message from task I of node %s", message.kind.value, sender)
        return t.result()
    if message.kind is MessageKind.TEIF:
        logger.node(state.me).warning("ignoring TEIF sent by task D of node %s", sender)
        return t.result()

    replied = False
    claim = message.claim
    if claim is not None:
        if outranks(claim, state.claim):
            _adopt(t, claim)
        elif outranks(state.claim, claim) and message.kind is not MessageKind.HELLO_BACK:
            t.send(sender, MessageKind.HELLO_BACK)
            replied = True

    state = t.state
    if (
        message.kind is MessageKind.MIA
        and message.view is not None
        and not state.is_coordinator
        and sender == state.coordinator
    ):
        t.update(operational=message.view | {state.me, sender})

    state = t.state
    if sender in state.suspected:
        t.update(suspected=state.suspected - {sender})
        t.cancel(Clause(ClauseKind.TEIF_RECV, sender))
        t.emit(Deduce(Deduction(DeductionKind.AGENT_SLOWED_DOWN, sender)))

    state = t.state
    if sender in state.operational:
        receive = _receive_clause(state, sender)
        if receive is not None:
            t.restart(receive)
    else:
        t.update(operational=state.operational | {sender})
        if state.is_coordinator:
            _register_coordinator_clauses(t, sender)
        t.emit(Milestone(f"REINTEGRATE {sender}"))
        if not replied and message.kind is not MessageKind.HELLO_BACK:
            t.send(sender, MessageKind.HELLO_BACK)

    _sync_probe(t)
    return t.result()


def task_i_step(state: AgentState, fired: FiredAlarm) -> tuple[AgentState, list[Action]]:
    """Run task I's periodic check of the "I'm alive" flag.

    Parameters:
        state: The agent state. Task D may have crashed.
        fired: The elapsed IM_ALIVE_CLEAR alarm.

    Raises:
        AgentError: When the alarm is not this node's IM_ALIVE_CLEAR clause.

    Returns:
        The new state, and its actions.
    """
    clause = fired.clause
    if clause.kind is not ClauseKind.IM_ALIVE_CLEAR or clause.subject != state.me:
        raise AgentError(f"node {state.me}: task I does not handle clause {clause}")
    t = _Transition(state, fired.fired_at)
    if state.im_alive_flag:
        t.update(im_alive_flag=False, im_alive_seen=True)
        return t.result()
    t.update(im_alive_seen=False)
    t.emit(Broadcast(Message(MessageKind.TEIF, state.me, Task.I, state.epoch, fired.fired_at)))
    if state.config.revive_delay > 0 and not state.reviving:
        t.update(reviving=True)
        t.emit(ReviveLocalD())
    return t.result()


def notify_event(state: AgentState, now: int) -> tuple[AgentState, list[Action]]:
    """Notify the coordinator of an application event.

    The notification doubles as a heartbeat: the next TAIA is postponed by a whole period.
    A coordinator records its own events locally and sends nothing.

    Parameters:
        state: The agent state.
        now: The current tick.

    Raises:
        AgentError: When task D crashed.

    Returns:
        The new state, and its actions.
    """
    _check_alive(state)
    t = _Transition(state, now)
    if state.is_coordinator or not state.config.ams_enabled:
        logger.node(state.me).debug("event recorded locally")
        return t.result()
    t.send(state.coordinator, MessageKind.EVENT_NOTIFY)
    t.restart(Clause(ClauseKind.TAIA_SEND, state.coordinator))
    return t.result()


def describe_start(state: AgentState) -> str:
    """Describe the role an agent starts with.

    Parameters:
        state: The agent state.

    Returns:
        A trace text like `START ASSISTANT coordinator=0 epoch=0`.
    """
    if state.is_coordinator:
        return f"START COORDINATOR epoch={state.epoch}"
    return f"START ASSISTANT coordinator={state.coordinator} epoch={state.epoch}"
