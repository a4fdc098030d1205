"""Tests for the `agent` module."""

from __future__ import annotations

from dataclasses import replace

import pytest

from suspicion import (
    AgentError,
    AgentState,
    AlarmManager,
    AlarmSpec,
    Broadcast,
    CancelAlarm,
    Clause,
    ClauseKind,
    Config,
    Deduce,
    Deduction,
    DeductionKind,
    ElectionError,
    ElectionStrategy,
    FiredAlarm,
    Message,
    MessageKind,
    Milestone,
    RecoveryHook,
    RegisterAlarm,
    RestartAlarm,
    ReviveLocalD,
    Role,
    Send,
    Task,
    ValidatedConfig,
    become_coordinator,
    describe_start,
    elect_successor,
    init_agent,
    notify_event,
    on_alarm,
    on_message,
    outranks,
    rejoin_agent,
    task_i_step,
    validate_config,
)


def _fire(state: AgentState, kind: ClauseKind, subject: int, at: int) -> tuple[AgentState, list]:
    clause = Clause(kind, subject)
    fired = FiredAlarm(clause.alarm_id, clause, at, Task.I if kind is ClauseKind.IM_ALIVE_CLEAR else Task.D)
    if kind is ClauseKind.IM_ALIVE_CLEAR:
        return task_i_step(state, fired)
    return on_alarm(state, fired)


def _registered(actions: list) -> list[str]:
    return [action.spec.id for action in actions if isinstance(action, RegisterAlarm)]


def _d_message(kind: MessageKind, sender: int, epoch: int, coordinator: int, at: int = 0) -> Message:
    return Message(kind, sender, Task.D, epoch, at, coordinator=coordinator)


def test_init_coordinator(config: ValidatedConfig) -> None:
    """The coordinator watches every assistant."""
    state, actions = init_agent(0, config)
    assert state.role is Role.COORDINATOR
    assert state.claim == (0, 0)
    assert state.operational == {0, 1, 2, 3}
    assert _registered(actions) == [
        "MIA_SEND/1",
        "TAIA_RECV/1",
        "MIA_SEND/2",
        "TAIA_RECV/2",
        "MIA_SEND/3",
        "TAIA_RECV/3",
        "IM_ALIVE_CLEAR/0",
        "IM_ALIVE_SET/0",
    ]
    clear = actions[-2]
    assert isinstance(clear, RegisterAlarm)
    assert clear.spec.target_task is Task.I
    assert clear.spec.deadline_in == 150_000
    assert Clause(ClauseKind.IM_ALIVE_CLEAR, 0) not in state.clauses
    assert len(state.clauses) == 7


def test_init_assistant(config: ValidatedConfig) -> None:
    """Assistants watch the coordinator only."""
    state, actions = init_agent(2, config)
    assert state.role is Role.ASSISTANT
    assert state.coordinator == 0
    assert _registered(actions) == ["TAIA_SEND/0", "MIA_RECV/0", "IM_ALIVE_CLEAR/2", "IM_ALIVE_SET/2"]
    assert all(action.spec.cyclic for action in actions)  # type: ignore[union-attr]


def test_watchdog_checks_before_the_flag_is_set_again(config: ValidatedConfig) -> None:
    """When both are due, task I clears the flag before task D sets it again."""
    _, actions = init_agent(2, config)
    alarms = AlarmManager()
    for action in actions:
        assert isinstance(action, RegisterAlarm)
        alarms.register(action.spec, now=0)
    due = [alarm.id for alarm in alarms.advance(150_000) if alarm.fired_at == 150_000]
    assert due == ["IM_ALIVE_CLEAR/2", "IM_ALIVE_SET/2"]


def test_init_single_node() -> None:
    """A lone node is an inert coordinator."""
    state, actions = init_agent(0, validate_config(Config(nodes=1)))
    assert state.is_coordinator
    assert actions == []


def test_init_unknown_node(config: ValidatedConfig) -> None:
    """Nodes outside the backbone are rejected."""
    with pytest.raises(AgentError):
        init_agent(4, config)


@pytest.mark.parametrize(
    ("operational", "failed", "strategy", "expected"),
    [
        ({1, 2, 3}, 0, ElectionStrategy.SKIP, 1),
        ({2, 3}, 0, ElectionStrategy.SKIP, 2),
        ({0, 1}, 3, ElectionStrategy.SKIP, 0),
        ({0, 2}, 1, ElectionStrategy.SKIP, 2),
        ({0, 1, 2, 3}, 2, ElectionStrategy.SKIP, 3),
        ({2, 3}, 0, ElectionStrategy.NAIVE, 1),
        ({1, 2, 3}, 3, ElectionStrategy.NAIVE, 0),
    ],
)
def test_elect_successor(operational: set[int], failed: int, strategy: ElectionStrategy, expected: int) -> None:
    """Successors are elected by scanning the identifiers after the failed coordinator.

    Parameters:
        operational: The nodes believed alive.
        failed: The failed coordinator.
        strategy: The election strategy.
        expected: The expected successor.
    """
    assert elect_successor(operational, failed, 4, strategy) == expected


def test_no_successor_left() -> None:
    """Electing among nobody fails."""
    with pytest.raises(ElectionError):
        elect_successor({0}, 0, 4)


@pytest.mark.parametrize(
    ("claim", "other", "expected"),
    [
        ((1, 3), (0, 0), True),
        ((0, 0), (1, 3), False),
        ((1, 1), (1, 2), True),
        ((1, 2), (1, 1), False),
        ((1, 1), (1, 1), False),
    ],
)
def test_outranks(claim: tuple[int, int], other: tuple[int, int], expected: bool) -> None:
    """Later epochs win, then lower coordinator identifiers.

    Parameters:
        claim: A claim.
        other: Another claim.
        expected: Whether the claim wins.
    """
    assert outranks(claim, other) is expected


def test_mia_carries_the_view(config: ValidatedConfig) -> None:
    """Coordinator heartbeats carry the operational set."""
    state, _ = init_agent(0, config)
    _, actions = _fire(state, ClauseKind.MIA_SEND, 1, 100_000)
    message = Message(MessageKind.MIA, 0, Task.D, 0, 100_000, coordinator=0, view=frozenset({0, 1, 2, 3}))
    assert actions == [Send(1, message)]


def test_assistant_heartbeat(config: ValidatedConfig) -> None:
    """Assistants send TAIA to their coordinator."""
    state, _ = init_agent(1, config)
    _, actions = _fire(state, ClauseKind.TAIA_SEND, 0, 100_000)
    assert actions == [Send(0, _d_message(MessageKind.TAIA, 1, 0, 0, 100_000))]


def test_missed_heartbeat_opens_a_suspicion_period(config: ValidatedConfig) -> None:
    """A receive alarm starts a suspicion period, once."""
    state, _ = init_agent(1, config)
    state, actions = _fire(state, ClauseKind.MIA_RECV, 0, 300_000)
    teif = Clause(ClauseKind.TEIF_RECV, 0)
    assert state.sus(0)
    assert actions == [Milestone("SUSPECT 0"), RegisterAlarm(AlarmSpec("TEIF_RECV/0", teif, 500_000))]
    state, actions = _fire(state, ClauseKind.MIA_RECV, 0, 600_000)
    assert actions == []
    assert teif in state.clauses


def test_expired_suspicion_elects_the_next_node(config: ValidatedConfig) -> None:
    """Node 1 takes over when the coordinator stays silent."""
    state, _ = init_agent(1, config)
    state, _ = _fire(state, ClauseKind.MIA_RECV, 0, 300_000)
    state, actions = _fire(state, ClauseKind.TEIF_RECV, 0, 800_000)
    assert state.role is Role.COORDINATOR
    assert state.claim == (1, 1)
    assert state.operational == {1, 2, 3}
    assert not state.suspected
    assert actions[:4] == [
        CancelAlarm(Clause(ClauseKind.TAIA_SEND, 0)),
        CancelAlarm(Clause(ClauseKind.MIA_RECV, 0)),
        Deduce(Deduction(DeductionKind.NODE_CRASHED, 0)),
        RecoveryHook("node 0"),
    ]
    assert _registered(actions) == ["MIA_SEND/2", "TAIA_RECV/2", "MIA_SEND/3", "TAIA_RECV/3"]
    assert actions[-1] == Milestone("ELECTED epoch=1")
    assert {clause.kind for clause in state.clauses} == {
        ClauseKind.MIA_SEND,
        ClauseKind.TAIA_RECV,
        ClauseKind.IM_ALIVE_SET,
    }


def test_expired_suspicion_follows_the_successor(config: ValidatedConfig) -> None:
    """Other assistants follow the elected node."""
    state, _ = init_agent(2, config)
    state, _ = _fire(state, ClauseKind.MIA_RECV, 0, 300_000)
    state, actions = _fire(state, ClauseKind.TEIF_RECV, 0, 800_000)
    assert state.role is Role.ASSISTANT
    assert state.claim == (1, 1)
    assert Milestone("FOLLOW 1 epoch=1") in actions
    assert _registered(actions) == ["TAIA_SEND/1", "MIA_RECV/1"]


def test_teif_resolves_a_crashed_agent(config: ValidatedConfig) -> None:
    """The coordinator drops an assistant whose task I reported its task D."""
    state, _ = init_agent(0, config)
    teif = Message(MessageKind.TEIF, 1, Task.I, 0, 5_250_000)
    state, actions = on_message(state, teif, 5_255_000)
    assert actions == [
        Milestone("SUSPECT 1"),
        CancelAlarm(Clause(ClauseKind.MIA_SEND, 1)),
        CancelAlarm(Clause(ClauseKind.TAIA_RECV, 1)),
        Deduce(Deduction(DeductionKind.AGENT_CRASHED_NODE_ALIVE, 1)),
    ]
    assert state.operational == {0, 2, 3}
    _, actions = on_message(state, teif, 5_400_000)
    assert actions == []


def test_teif_during_suspicion(config: ValidatedConfig) -> None:
    """A TEIF closes a pending suspicion period."""
    state, _ = init_agent(0, config)
    state, _ = _fire(state, ClauseKind.TAIA_RECV, 1, 5_200_005)
    state, actions = on_message(state, Message(MessageKind.TEIF, 1, Task.I, 0, 5_250_000), 5_250_007)
    assert actions[0] == CancelAlarm(Clause(ClauseKind.TEIF_RECV, 1))
    assert Milestone("SUSPECT 1") not in actions
    assert actions[-1] == Deduce(Deduction(DeductionKind.AGENT_CRASHED_NODE_ALIVE, 1))
    assert not state.suspected


def test_assistants_ignore_teif_about_other_assistants(config: ValidatedConfig) -> None:
    """Membership changes reach assistants through the coordinator."""
    state, _ = init_agent(2, config)
    new_state, actions = on_message(state, Message(MessageKind.TEIF, 1, Task.I, 0, 10), 20)
    assert actions == []
    assert new_state == state


def test_late_heartbeat_means_slowed_down(config: ValidatedConfig) -> None:
    """A sign of life during the suspicion period resolves it."""
    state, _ = init_agent(0, config)
    state, _ = _fire(state, ClauseKind.TAIA_RECV, 2, 1_200_001)
    state, actions = on_message(state, _d_message(MessageKind.TAIA, 2, 0, 0, 1_000_000), 1_350_000)
    assert actions == [
        CancelAlarm(Clause(ClauseKind.TEIF_RECV, 2)),
        Deduce(Deduction(DeductionKind.AGENT_SLOWED_DOWN, 2)),
        RestartAlarm(Clause(ClauseKind.TAIA_RECV, 2)),
    ]
    assert not state.suspected
    assert state.operational == {0, 1, 2, 3}


def test_heartbeat_restarts_the_receive_alarm(config: ValidatedConfig) -> None:
    """Every message from the coordinator is a sign of life."""
    state, _ = init_agent(3, config)
    _, actions = on_message(state, _d_message(MessageKind.HELLO_BACK, 0, 0, 0), 10)
    assert actions == [RestartAlarm(Clause(ClauseKind.MIA_RECV, 0))]


def test_mia_view_updates_assistants(config: ValidatedConfig) -> None:
    """Assistants adopt the operational set of their coordinator."""
    state, _ = init_agent(3, config)
    mia = Message(MessageKind.MIA, 0, Task.D, 0, 10, coordinator=0, view=frozenset({0, 2, 3}))
    state, _ = on_message(state, mia, 20)
    assert state.operational == {0, 2, 3}


def test_reintegration(config: ValidatedConfig) -> None:
    """A dropped node comes back with its first message."""
    state, _ = init_agent(0, config)
    state, _ = on_message(state, Message(MessageKind.TEIF, 1, Task.I, 0, 10), 20)
    state, actions = on_message(state, _d_message(MessageKind.HELLO, 1, 0, 0, 200_000), 200_005)
    assert state.operational == {0, 1, 2, 3}
    assert _registered(actions) == ["MIA_SEND/1", "TAIA_RECV/1"]
    assert actions[-2:] == [
        Milestone("REINTEGRATE 1"),
        Send(1, _d_message(MessageKind.HELLO_BACK, 0, 0, 0, 200_005)),
    ]


def test_stale_coordinator_is_demoted(config: ValidatedConfig) -> None:
    """A HELLO_BACK with a later epoch demotes a returning coordinator."""
    state, _ = init_agent(0, config)
    state, actions = on_message(state, _d_message(MessageKind.HELLO_BACK, 1, 1, 1), 12_000_010)
    assert state.role is Role.ASSISTANT
    assert state.claim == (1, 1)
    assert Milestone("DEMOTED coordinator=1 epoch=1") in actions
    assert not any(clause.kind is ClauseKind.MIA_SEND for clause in state.clauses)
    assert {Clause(ClauseKind.TAIA_SEND, 1), Clause(ClauseKind.MIA_RECV, 1)} <= state.clauses
    assert not any(isinstance(action, Send) for action in actions)


def test_outranked_claims_get_a_reply(config: ValidatedConfig) -> None:
    """Switching coordinators tells the previous one, and stale claims get corrected."""
    state, _ = init_agent(2, config)
    state, actions = on_message(state, _d_message(MessageKind.HELLO_BACK, 1, 1, 1), 100)
    assert Milestone("FOLLOW 1 epoch=1") in actions
    assert Send(0, _d_message(MessageKind.HELLO_BACK, 2, 1, 1, 100)) in actions
    mia = Message(MessageKind.MIA, 0, Task.D, 0, 150, coordinator=0, view=frozenset({0, 1, 2, 3}))
    state, actions = on_message(state, mia, 200)
    assert actions == [Send(0, _d_message(MessageKind.HELLO_BACK, 2, 1, 1, 200))]
    assert state.claim == (1, 1)
    assert state.operational == {0, 1, 2, 3}


def test_lonely_coordinator_probes() -> None:
    """A coordinator left alone keeps broadcasting HELLO until someone answers."""
    two_nodes = validate_config(Config(nodes=2))
    state, _ = init_agent(0, two_nodes)
    state, actions = on_message(state, Message(MessageKind.TEIF, 1, Task.I, 0, 10), 20)
    probe = Clause(ClauseKind.HELLO_SEND, 0)
    assert probe in state.clauses
    assert _registered(actions) == ["HELLO_SEND/0"]
    _, actions = _fire(state, ClauseKind.HELLO_SEND, 0, 100_020)
    assert actions == [Broadcast(_d_message(MessageKind.HELLO, 0, 0, 0, 100_020))]
    state, actions = on_message(state, _d_message(MessageKind.HELLO, 1, 0, 1, 150_000), 150_001)
    assert probe not in state.clauses
    assert CancelAlarm(probe) in actions
    assert state.operational == {0, 1}


def test_task_i_checks_the_flag(config: ValidatedConfig) -> None:
    """Task I clears a set flag, and reports its task D when the flag stayed clear."""
    state, _ = init_agent(1, config)
    state, actions = _fire(state, ClauseKind.IM_ALIVE_CLEAR, 1, 150_000)
    assert actions == []
    assert not state.im_alive_flag
    state, actions = _fire(state, ClauseKind.IM_ALIVE_CLEAR, 1, 300_000)
    assert actions == [Broadcast(Message(MessageKind.TEIF, 1, Task.I, 0, 300_000)), ReviveLocalD()]
    assert state.reviving
    assert not state.im_alive_seen
    _, actions = _fire(state, ClauseKind.IM_ALIVE_CLEAR, 1, 450_000)
    assert actions == [Broadcast(Message(MessageKind.TEIF, 1, Task.I, 0, 450_000))]


def test_task_d_sets_the_flag(config: ValidatedConfig) -> None:
    """Task D sets the flag at each period."""
    state, _ = init_agent(1, config)
    state, _ = _fire(state, ClauseKind.IM_ALIVE_CLEAR, 1, 150_000)
    state, actions = _fire(state, ClauseKind.IM_ALIVE_SET, 1, 200_000)
    assert actions == []
    assert state.im_alive_flag


def test_no_revival_without_delay() -> None:
    """Revival is disabled by a zero delay."""
    state, _ = init_agent(1, validate_config(Config(revive_delay=0)))
    state = replace(state, im_alive_flag=False)
    _, actions = _fire(state, ClauseKind.IM_ALIVE_CLEAR, 1, 150_000)
    assert not any(isinstance(action, ReviveLocalD) for action in actions)


def test_task_i_rejects_other_clauses(config: ValidatedConfig) -> None:
    """Task I only handles its own flag checks."""
    state, _ = init_agent(1, config)
    clause = Clause(ClauseKind.IM_ALIVE_CLEAR, 2)
    with pytest.raises(AgentError):
        task_i_step(state, FiredAlarm(clause.alarm_id, clause, 150_000, Task.I))


def test_unknown_clause(config: ValidatedConfig) -> None:
    """Task D rejects alarms it did not register."""
    state, _ = init_agent(1, config)
    with pytest.raises(AgentError):
        _fire(state, ClauseKind.MIA_SEND, 2, 100_000)


def test_crashed_agent_rejects_inputs(config: ValidatedConfig) -> None:
    """Crashed agents do not run."""
    state, _ = init_agent(1, config)
    state = replace(state, crashed=True)
    with pytest.raises(AgentError):
        on_message(state, _d_message(MessageKind.MIA, 0, 0, 0), 10)
    with pytest.raises(AgentError):
        _fire(state, ClauseKind.TAIA_SEND, 0, 100_000)
    with pytest.raises(AgentError):
        notify_event(state, 10)


def test_notify_event_piggybacks_a_heartbeat(config: ValidatedConfig) -> None:
    """Event notifications postpone the next TAIA."""
    state, _ = init_agent(1, config)
    _, actions = notify_event(state, 42)
    assert actions == [
        Send(0, _d_message(MessageKind.EVENT_NOTIFY, 1, 0, 0, 42)),
        RestartAlarm(Clause(ClauseKind.TAIA_SEND, 0)),
    ]
    coordinator, _ = init_agent(0, config)
    assert notify_event(coordinator, 42)[1] == []


def test_revived_agent_keeps_node_knowledge(config: ValidatedConfig) -> None:
    """A revived task D starts as an assistant with the epoch and view of the node."""
    prior, _ = init_agent(0, config)
    prior = replace(prior, crashed=True, epoch=3, operational=frozenset({0, 2, 3}), im_alive_seen=False)
    state, actions = rejoin_agent(0, config, prior)
    assert state.role is Role.ASSISTANT
    assert state.claim == (3, 2)
    assert not state.crashed
    assert state.im_alive_flag
    assert not state.im_alive_seen
    assert _registered(actions) == ["TAIA_SEND/2", "MIA_RECV/2", "IM_ALIVE_SET/0"]
    assert actions[-1] == Broadcast(_d_message(MessageKind.HELLO, 0, 3, 2))


def test_rebooted_agent_starts_over(config: ValidatedConfig) -> None:
    """A rebooted node starts like at tick 0, and says hello."""
    state, actions = rejoin_agent(1, config)
    initial, init_actions = init_agent(1, config)
    assert state == initial
    assert actions == [*init_actions, Broadcast(_d_message(MessageKind.HELLO, 1, 0, 0))]


def test_become_coordinator(config: ValidatedConfig) -> None:
    """Assistant clauses are swapped for coordinator clauses."""
    state, _ = init_agent(2, config)
    state, actions = become_coordinator(state)
    assert state.claim == (1, 2)
    assert actions[:2] == [
        CancelAlarm(Clause(ClauseKind.MIA_RECV, 0)),
        CancelAlarm(Clause(ClauseKind.TAIA_SEND, 0)),
    ]
    assert _registered(actions) == ["MIA_SEND/0", "TAIA_RECV/0", "MIA_SEND/1", "TAIA_RECV/1", "MIA_SEND/3", "TAIA_RECV/3"]


@pytest.mark.parametrize(
    ("node", "expected"),
    [(0, "START COORDINATOR epoch=0"), (3, "START ASSISTANT coordinator=0 epoch=0")],
)
def test_describe_start(config: ValidatedConfig, node: int, expected: str) -> None:
    """Start events name the role.

    Parameters:
        config: The default configuration.
        node: The node.
        expected: The expected text.
    """
    assert describe_start(init_agent(node, config)[0]) == expected
