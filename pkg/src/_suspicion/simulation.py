# This module contains the discrete-event simulator driving the agents.
#
# The simulator owns a virtual clock in ticks, one alarm manager per node,
# and a queue of pending events (deliveries, fault injections, revivals, reboots).
# It interprets the actions returned by agent transitions, injects faults,
# and records protocol milestones in a trace.
#
# Runs are deterministic: the trace is a pure function of the configuration,
# the faults, the horizon and the seed.

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Union

from _suspicion.agent import describe_start, init_agent, notify_event, on_alarm, on_message, rejoin_agent, task_i_step
from _suspicion.alarms import AlarmManager
from _suspicion.enumerations import FaultKind, MessageKind, Role, Task
from _suspicion.exceptions import FaultTargetError, SimulationError
from _suspicion.logger import logger
from _suspicion.models import (
    Broadcast,
    CancelAlarm,
    Deduce,
    FaultSpec,
    Message,
    Milestone,
    RecoveryHook,
    RegisterAlarm,
    RestartAlarm,
    ReviveLocalD,
    Send,
)

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Sequence

    from _suspicion.agent import AgentState
    from _suspicion.alarms import FiredAlarm
    from _suspicion.config import ValidatedConfig
    from _suspicion.models import Action


def format_time(at: int, tick_ns: int) -> str:
    """Format a tick as seconds, with six decimals.

    Examples:
        >>> format_time(10_200_001, 1000)
        '10.200001'

    Parameters:
        at: The tick.
        tick_ns: The duration of a tick, in nanoseconds.

    Returns:
        The formatted time.
    """
    seconds, nanoseconds = divmod(at * tick_ns, 1_000_000_000)
    return f"{seconds}.{nanoseconds // 1000:06d}"


@dataclass(frozen=True)
class TraceEvent:
    """An event of the trace."""

    event_id: int
    """Identifier, consecutive per node. Verbose events use their own identifiers."""
    at: int
    """The tick the event happened at."""
    node: int
    """The node the event happened on."""
    task: Task
    """The task the event is attributed to."""
    text: str
    """The canonical event text."""
    verbose: bool = False
    """Whether this is a heartbeat-level event."""

    def as_line(self, tick_ns: int) -> str:
        """Render the event as a tab-separated line.

        Parameters:
            tick_ns: The duration of a tick, in nanoseconds.

        Returns:
            The line, without a trailing newline.
        """
        return f"{self.event_id}\t{format_time(self.at, tick_ns)}\t{self.node}\t{self.task.value}\t{self.text}"

    def as_dict(self, *, tick_ns: int = 1000, **kwargs: Any) -> dict[str, Any]:  # noqa: ARG002
        """Return this event's data as a dictionary.

        Parameters:
            tick_ns: The duration of a tick, in nanoseconds.
            **kwargs: Additional serialization options.

        Returns:
            A dictionary.
        """
        return {
            "event_id": self.event_id,
            "time": format_time(self.at, tick_ns),
            "node": self.node,
            "task": self.task,
            "text": self.text,
        }


class Trace:
    """The ordered events of a run."""

    def __init__(self, tick_ns: int) -> None:
        """Initialize the trace.

        Parameters:
            tick_ns: The duration of a tick, in nanoseconds.
        """
        self.tick_ns: int = tick_ns
        """The duration of a tick, in nanoseconds."""
        self.events: list[TraceEvent] = []
        """The events, in order."""
        self._next_ids: dict[tuple[int, bool], int] = {}

    def __iter__(self) -> Iterator[TraceEvent]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return self.tick_ns == other.tick_ns and self.events == other.events

    __hash__ = None  # type: ignore[assignment]

    def record(self, at: int, node: int, task: Task, text: str, *, verbose: bool = False) -> TraceEvent:
        """Record an event.

        Parameters:
            at: The current tick.
            node: The node.
            task: The task.
            text: The event text.
            verbose: Whether this is a heartbeat-level event.

        Returns:
            The recorded event.
        """
        key = (node, verbose)
        event_id = self._next_ids.get(key, 0)
        self._next_ids[key] = event_id + 1
        event = TraceEvent(event_id, at, node, task, text, verbose)
        self.events.append(event)
        return event

    def select(
        self,
        prefix: str = "",
        *,
        node: int | None = None,
        task: Task | None = None,
        verbose: bool = False,
    ) -> list[TraceEvent]:
        """Select events.

        Parameters:
            prefix: Keep events whose text starts with this prefix.
            node: Keep events of this node only.
            task: Keep events of this task only.
            verbose: Whether to keep verbose events too.

        Returns:
            The selected events, in order.
        """
        return [
            event
            for event in self.events
            if event.text.startswith(prefix)
            and (node is None or event.node == node)
            and (task is None or event.task is task)
            and (verbose or not event.verbose)
        ]

    def lines(self, *, verbose: bool = False) -> list[str]:
        """Render the trace as tab-separated lines.

        Parameters:
            verbose: Whether to include verbose events.

        Returns:
            The lines.
        """
        return [event.as_line(self.tick_ns) for event in self.events if verbose or not event.verbose]


# ========= EVENTS ========= #


@dataclass(frozen=True)
class Deliver:
    """A message reaches a task."""

    message: Message
    to_node: int
    to_task: Task
    incarnation: int


@dataclass(frozen=True)
class FaultTrigger:
    """A fault is injected."""

    spec: FaultSpec


@dataclass(frozen=True)
class ReviveComplete:
    """The revival of a crashed task completes."""

    node: int
    task: Task
    incarnation: int


@dataclass(frozen=True)
class RebootComplete:
    """A crashed node finishes rebooting."""

    node: int
    incarnation: int


@dataclass(frozen=True)
class SlowdownOver:
    """The slowdown of a node ends."""

    node: int
    token: int


@dataclass(frozen=True)
class Notify:
    """The application notifies an event on a node."""

    node: int


SimEventKind = Union[Deliver, FaultTrigger, ReviveComplete, RebootComplete, SlowdownOver, Notify]


@dataclass(frozen=True, order=True)
class SimEvent:
    """A scheduled event. Events are processed by tick, then by scheduling order."""

    at: int
    seq: int
    kind: SimEventKind = field(compare=False)


@dataclass
class NodeRecord:
    """The simulated state of a node."""

    id: int
    """The node identifier."""
    agent: AgentState
    """The state of the agent."""
    alarms: AlarmManager
    """The node's task A."""
    alive: bool = True
    """Whether the node is up."""
    d_alive: bool = True
    """Whether task D runs."""
    i_alive: bool = True
    """Whether task I runs."""
    incarnation: int = 0
    """Incremented at each node crash."""
    slowdown_factor: int = 1
    """Current multiplier of outgoing latencies."""
    slowdown_token: int = 0
    """Identifies the latest slowdown."""

    @property
    def operational(self) -> bool:
        """Whether the agent of this node runs."""
        return self.alive and self.d_alive


@dataclass(frozen=True)
class PredicateReport:
    """The global correctness predicate, evaluated at one instant."""

    at: int
    """The tick of the evaluation."""
    live: tuple[int, ...]
    """The nodes whose task D runs."""
    coordinators: tuple[int, ...]
    """The live agents believing themselves coordinator."""
    agreed_coordinator: int | None
    """The coordinator all live agents believe in, if they agree."""
    stuck: tuple[tuple[int, int], ...]
    """The `(node, suspected)` pairs pending for too long."""
    problems: tuple[str, ...]
    """Human-readable problems. Empty when the predicate holds."""

    @property
    def holds(self) -> bool:
        """Whether exactly one coordinator is agreed upon, with no stuck suspicion."""
        return not self.problems

    def as_dict(self, **kwargs: Any) -> dict[str, Any]:  # noqa: ARG002
        """Return this report's data as a dictionary.

        Parameters:
            **kwargs: Additional serialization options.

        Returns:
            A dictionary.
        """
        return {
            "at": self.at,
            "holds": self.holds,
            "live": list(self.live),
            "coordinators": list(self.coordinators),
            "agreed_coordinator": self.agreed_coordinator,
            "stuck": [list(pair) for pair in self.stuck],
            "problems": list(self.problems),
        }


class World:
    """A simulated backbone.

    Examples:
        >>> world = World(config, faults)
        >>> world.run(10_000_000)
        >>> world.global_predicate().holds
        True
    """

    def __init__(
        self,
        config: ValidatedConfig,
        faults: Iterable[FaultSpec] = (),
        *,
        seed: int | None = None,
        notifications: Iterable[tuple[int, int]] = (),
        verbose: bool = False,
    ) -> None:
        """Initialize the world, at tick 0.

        Parameters:
            config: The backbone configuration.
            faults: The faults to inject.
            seed: The seed of the latency generator. By default, the seed of the configuration.
            notifications: Application events, as `(tick, node)` pairs.
            verbose: Whether to record message sends and receptions.

        Raises:
            FaultTargetError: When a fault targets an unknown node or component.
            SimulationError: When a fault or notification is malformed.
        """
        self.config: ValidatedConfig = config
        """The backbone configuration."""
        self.seed: int = config.seed if seed is None else seed
        """The seed of the latency generator."""
        self.verbose: bool = verbose
        """Whether message sends and receptions are recorded."""
        self.now: int = 0
        """The current tick."""
        self.trace: Trace = Trace(config.tick_ns)
        """The trace of the run."""
        self.nodes: list[NodeRecord] = []
        """The simulated nodes."""

        self._rng = random.Random(self.seed)
        self._queue: list[SimEvent] = []
        self._seq = 0
        self._channels: dict[tuple[int, Task, int, Task], int] = {}
        self._suspicions: dict[tuple[int, int], int] = {}

        faults = list(faults)
        for spec in faults:
            self._check_fault(spec)
        notifications = list(notifications)
        for at, node in notifications:
            if not 0 <= node < config.nodes:
                raise FaultTargetError(f"notification targets unknown node {node}")
            if at <= 0:
                raise SimulationError(f"notification at tick {at}, expected a positive tick")

        startup = []
        for node in range(config.nodes):
            state, actions = init_agent(node, config)
            self.nodes.append(NodeRecord(node, state, AlarmManager()))
            startup.append(actions)
        for record, actions in zip(self.nodes, startup):
            self.trace.record(0, record.id, Task.D, describe_start(record.agent))
            self._apply(record, Task.D, actions)

        for spec in sorted(faults, key=lambda spec: spec.at):
            self._push(spec.at, FaultTrigger(spec))
        for at, node in sorted(notifications):
            self._push(at, Notify(node))

    # ========= PUBLIC API ========= #

    def run(self, horizon: int) -> Trace:
        """Process events until the horizon (included).

        Successive calls continue the same run.

        Parameters:
            horizon: The last tick to simulate.

        Raises:
            SimulationError: When the horizon is in the past.

        Returns:
            The trace so far.
        """
        if horizon < self.now:
            raise SimulationError(f"horizon {horizon} is before the current tick {self.now}")
        while True:
            event_at = self._queue[0].at if self._queue else None
            alarm_at, record = self._next_alarm()
            if event_at is not None and (alarm_at is None or event_at <= alarm_at):
                if event_at > horizon:
                    break
                event = heapq.heappop(self._queue)
                self.now = event.at
                self._handle(event.kind)
            elif alarm_at is not None and record is not None:
                if alarm_at > horizon:
                    break
                self.now = alarm_at
                fired = record.alarms.pop_due(self.now)
                if fired is not None:
                    self._dispatch_alarm(record, fired)
            else:
                break
        self.now = horizon
        return self.trace

    def apply_fault(self, spec: FaultSpec) -> None:
        """Inject a fault at the current tick.

        Parameters:
            spec: The fault. Its injection tick is ignored.

        Raises:
            FaultTargetError: When the fault targets an unknown node or component.
        """
        self._check_fault(spec, check_time=False)
        record = self.nodes[spec.target]
        self.trace.record(self.now, record.id, Task.A, f"INJECT {spec.describe()}")
        logger.info("Tick %s: injecting %s", self.now, spec.describe())

        if spec.kind is FaultKind.CRASH_COMPONENT:
            if spec.task is Task.D:
                if not record.operational:
                    logger.node(record.id).debug("task D is already down")
                    return
                record.d_alive = False
                self._crash_agent(record)
            elif not record.alive or not record.i_alive:
                logger.node(record.id).debug("task I is already down")
            else:
                record.i_alive = False
        elif spec.kind in {FaultKind.CRASH_NODE, FaultKind.REBOOT_NODE}:
            if record.alive:
                record.alive = record.d_alive = record.i_alive = False
                record.alarms = AlarmManager()
                record.incarnation += 1
                record.slowdown_factor = 1
                self._crash_agent(record)
                self.trace.record(self.now, record.id, Task.A, "KILLED")
            else:
                logger.node(record.id).debug("node is already down")
            delay = self.config.node_reboot_delay
            if spec.kind is FaultKind.REBOOT_NODE:
                delay = max(delay, 1)
            if delay > 0 and not record.alive:
                self._push(self.now + delay, RebootComplete(record.id, record.incarnation))
        elif spec.kind is FaultKind.SLOWDOWN:
            record.slowdown_factor = spec.factor or 1
            record.slowdown_token += 1
            self._push(self.now + (spec.duration or 1), SlowdownOver(record.id, record.slowdown_token))

    def global_predicate(self) -> PredicateReport:
        """Evaluate the global correctness predicate at the current tick.

        Returns:
            The report.
        """
        live = [record for record in self.nodes if record.operational]
        coordinators = tuple(record.id for record in live if record.agent.role is Role.COORDINATOR)
        believed = {record.agent.coordinator for record in live}
        agreed = next(iter(believed)) if len(believed) == 1 else None
        limit = self.config.teif_recv + self.config.max_latency
        live_ids = {record.id for record in live}
        stuck = tuple(
            sorted(
                pair
                for pair, since in self._suspicions.items()
                if pair[0] in live_ids and self.now - since > limit
            ),
        )

        problems = []
        if not live:
            problems.append("no operational agents")
        else:
            if len(coordinators) != 1:
                problems.append(f"{len(coordinators)} coordinators among operational agents")
            if agreed is None:
                problems.append("operational agents disagree on the coordinator")
        problems.extend(f"node {node} suspects node {suspect} for too long" for node, suspect in stuck)
        return PredicateReport(
            at=self.now,
            live=tuple(sorted(live_ids)),
            coordinators=coordinators,
            agreed_coordinator=agreed,
            stuck=stuck,
            problems=tuple(problems),
        )

    @property
    def quiescent(self) -> bool:
        """Whether no live agent has a suspicion pending."""
        return not any(record.operational and record.agent.suspected for record in self.nodes)

    # ========= INTERNALS ========= #

    def _check_fault(self, spec: FaultSpec, *, check_time: bool = True) -> None:
        if not 0 <= spec.target < self.config.nodes:
            raise FaultTargetError(f"fault {spec.describe()} targets unknown node {spec.target}")
        if spec.kind is FaultKind.CRASH_COMPONENT and spec.task not in {Task.D, Task.I}:
            raise FaultTargetError(f"fault {spec.describe()} targets unknown component {spec.task}")
        if check_time and spec.at <= 0:
            raise SimulationError(f"fault {spec.describe()} at tick {spec.at}, expected a positive tick")
        if spec.kind is FaultKind.SLOWDOWN and (
            spec.duration is None or spec.duration <= 0 or spec.factor is None or spec.factor < 1
        ):
            raise SimulationError(f"slowdown {spec.describe()} needs a positive duration and a factor of at least 1")

    def _push(self, at: int, kind: SimEventKind) -> None:
        self._seq += 1
        heapq.heappush(self._queue, SimEvent(at, self._seq, kind))

    def _next_alarm(self) -> tuple[int | None, NodeRecord | None]:
        best_at: int | None = None
        best: NodeRecord | None = None
        for record in self.nodes:
            if not record.alive:
                continue
            deadline = record.alarms.next_deadline()
            if deadline is not None and (best_at is None or deadline < best_at):
                best_at, best = deadline, record
        return best_at, best

    def _crash_agent(self, record: NodeRecord) -> None:
        record.agent = replace(record.agent, crashed=True)
        for pair in [pair for pair in self._suspicions if pair[0] == record.id]:
            del self._suspicions[pair]

    def _transition(self, record: NodeRecord, task: Task, state: AgentState, actions: Sequence[Action]) -> None:
        before = record.agent.suspected
        record.agent = state
        for node in state.suspected - before:
            self._suspicions[(record.id, node)] = self.now
        for node in before - state.suspected:
            self._suspicions.pop((record.id, node), None)
        self._apply(record, task, actions)

    def _dispatch_alarm(self, record: NodeRecord, fired: FiredAlarm) -> None:
        if fired.target_task is Task.I:
            if not record.i_alive:
                logger.node(record.id).debug("dropping %s, task I is down", fired.clause)
                return
            state, actions = task_i_step(record.agent, fired)
            self._transition(record, Task.I, state, actions)
        else:
            if not record.d_alive:
                logger.node(record.id).debug("dropping %s, task D is down", fired.clause)
                return
            state, actions = on_alarm(record.agent, fired)
            self._transition(record, Task.D, state, actions)

    def _handle(self, event: SimEventKind) -> None:
        if isinstance(event, Deliver):
            self._deliver(event)
        elif isinstance(event, FaultTrigger):
            self.apply_fault(event.spec)
        elif isinstance(event, ReviveComplete):
            self._revive(event)
        elif isinstance(event, RebootComplete):
            self._reboot(event)
        elif isinstance(event, SlowdownOver):
            record = self.nodes[event.node]
            if event.token == record.slowdown_token and record.slowdown_factor != 1:
                record.slowdown_factor = 1
                self.trace.record(self.now, record.id, Task.A, "SLOWDOWN OVER")
        elif isinstance(event, Notify):
            record = self.nodes[event.node]
            if not record.operational:
                logger.node(record.id).debug("dropping event notification, task D is down")
                return
            state, actions = notify_event(record.agent, self.now)
            self._transition(record, Task.D, state, actions)

    def _deliver(self, event: Deliver) -> None:
        record = self.nodes[event.to_node]
        message = event.message
        if not record.alive or record.incarnation != event.incarnation or not record.d_alive:
            logger.node(record.id).debug(
                "discarding %s from node %s, the recipient is down",
                message.kind.value,
                message.sender,
            )
            if self.verbose:
                self.trace.record(
                    self.now,
                    record.id,
                    Task.NET,
                    f"DROP {message.kind.value} <- {message.sender}",
                    verbose=True,
                )
            return
        if self.verbose:
            self.trace.record(
                self.now,
                record.id,
                event.to_task,
                f"RECV {message.kind.value} <- {message.sender}",
                verbose=True,
            )
        state, actions = on_message(record.agent, message, self.now)
        self._transition(record, Task.D, state, actions)

    def _revive(self, event: ReviveComplete) -> None:
        record = self.nodes[event.node]
        if not record.alive or record.incarnation != event.incarnation or record.d_alive:
            logger.node(record.id).debug("discarding stale revival")
            return
        record.d_alive = True
        record.alarms.clear(lambda spec: spec.target_task is Task.D)
        state, actions = rejoin_agent(record.id, self.config, record.agent, now=self.now)
        self.trace.record(self.now, record.id, Task.A, "REVIVED")
        self.trace.record(self.now, record.id, Task.D, describe_start(state))
        self._transition(record, Task.D, state, actions)

    def _reboot(self, event: RebootComplete) -> None:
        record = self.nodes[event.node]
        if record.alive or record.incarnation != event.incarnation:
            logger.node(record.id).debug("discarding stale reboot")
            return
        record.alive = record.d_alive = record.i_alive = True
        record.alarms = AlarmManager()
        state, actions = rejoin_agent(record.id, self.config, now=self.now)
        self.trace.record(self.now, record.id, Task.A, "REBOOTED")
        self.trace.record(self.now, record.id, Task.D, describe_start(state))
        self._transition(record, Task.D, state, actions)

    def _transmit(self, record: NodeRecord, task: Task, to: int, message: Message) -> None:
        latency = self._rng.randint(1, self.config.max_latency) * record.slowdown_factor
        channel = (record.id, task, to, Task.D)
        at = max(self.now + latency, self._channels.get(channel, 0))
        self._channels[channel] = at
        self._push(at, Deliver(message, to, Task.D, self.nodes[to].incarnation))
        if self.verbose:
            self.trace.record(self.now, record.id, task, f"SEND {message.kind.value} -> {to}", verbose=True)

    def _apply(self, record: NodeRecord, task: Task, actions: Sequence[Action]) -> None:
        for action in actions:
            if isinstance(action, Send):
                self._transmit(record, task, action.to, action.message)
            elif isinstance(action, Broadcast):
                if action.message.kind is MessageKind.TEIF:
                    self.trace.record(self.now, record.id, task, "BROADCAST TEIF")
                for node in range(self.config.nodes):
                    if node != record.id:
                        self._transmit(record, task, node, action.message)
            elif isinstance(action, RegisterAlarm):
                record.alarms.register(action.spec, self.now)
            elif isinstance(action, CancelAlarm):
                if action.clause.alarm_id in record.alarms:
                    record.alarms.cancel(action.clause.alarm_id)
                else:
                    logger.node(record.id).debug("no alarm %s to cancel", action.clause)
            elif isinstance(action, RestartAlarm):
                if action.clause.alarm_id in record.alarms:
                    record.alarms.restart(action.clause.alarm_id, self.now)
                else:
                    logger.node(record.id).debug("no alarm %s to restart", action.clause)
            elif isinstance(action, Deduce):
                self.trace.record(self.now, record.id, Task.D, f"DEDUCE {action.deduction}")
            elif isinstance(action, ReviveLocalD):
                self.trace.record(self.now, record.id, Task.I, "REVIVE D")
                self._push(self.now + self.config.revive_delay, ReviveComplete(record.id, Task.D, record.incarnation))
            elif isinstance(action, RecoveryHook):
                self.trace.record(self.now, record.id, Task.D, f"RECOVERY {action.description}")
            elif isinstance(action, Milestone):
                self.trace.record(self.now, record.id, Task.D, action.text)


def run(
    config: ValidatedConfig,
    faults: Iterable[FaultSpec],
    horizon: int,
    seed: int | None = None,
    *,
    notifications: Iterable[tuple[int, int]] = (),
    verbose: bool = False,
) -> Trace:
    """Simulate a backbone until a horizon.

    Parameters:
        config: The backbone configuration.
        faults: The faults to inject.
        horizon: The last tick to simulate.
        seed: The seed of the latency generator. By default, the seed of the configuration.
        notifications: Application events, as `(tick, node)` pairs.
        verbose: Whether to record message sends and receptions.

    Raises:
        SimulationError: When the horizon is not positive, or a fault is invalid.

    Returns:
        The trace of the run.
    """
    if horizon <= 0:
        raise SimulationError(f"horizon must be positive, got {horizon}")
    world = World(config, faults, seed=seed, notifications=notifications, verbose=verbose)
    return world.run(horizon)


def apply_fault(world: World, spec: FaultSpec) -> World:
    """Inject a fault in a world, at its current tick.

    Parameters:
        world: The world.
        spec: The fault.

    Returns:
        The same world, modified.
    """
    world.apply_fault(spec)
    return world


def global_predicate(world: World) -> PredicateReport:
    """Evaluate the global correctness predicate of a world.

    Parameters:
        world: The world.

    Returns:
        The report.
    """
    return world.global_predicate()
