# This top-level module imports all public names from the package,
# and exposes them as public objects. We have tests to make sure
# no object is forgotten in this list.

"""Suspicion package.

Crash detection and coordinator failover for distributed backbones,
through mutual suspicion between a coordinator and its assistants.
Runs are simulated by a deterministic discrete-event simulator.

The entirety of the public API is exposed here, in the top-level `suspicion` module.

All messages written to standard output or error are logged using the `logging` module.
Our logger's name is set to `"suspicion"` and is public (you can rely on it).
You can obtain the logger from the standard `logging` module: `logging.getLogger("suspicion")`.
Diagnostics about a single node go to a child logger, `"suspicion.node<id>"`.
Actual logging messages are not part of the public API (they might change without notice).

Raised exceptions throughout the package are part of the public API (you can rely on them).
Their actual messages are not part of the public API (they might change without notice).

The following paragraphs will help you discover the package's content.

## CLI entrypoints

The package provides a command-line interface (CLI). The CLI entrypoints can be called from Python code.

- [`suspicion.main`][]: Run the main program.
- [`suspicion.run_scenario`][]: Run a scenario and print its trace.
- [`suspicion.normalize`][]: Print the canonical rendering of scripts.

## Configuration

- [`suspicion.Config`][]: The timeouts and settings of a backbone.
- [`suspicion.parse_config`][]: Parse a configuration script.
- [`suspicion.load_config`][]: Load and parse a configuration script.
- [`suspicion.render_config`][]: Render a configuration as a canonical script.
- [`suspicion.validate_config`][]: Check the timeout inequalities of a configuration.

## Alarms

Task A is a clock-driven alarm manager.

- [`suspicion.AlarmManager`][]: Order alarms by deadline, fire them when the clock advances.
- [`suspicion.AlarmSpec`][]: The specification of an alarm.
- [`suspicion.FiredAlarm`][]: An elapsed alarm.

## Agents

Agents are pure state machines: transitions return a new state and the actions to perform.

- [`suspicion.init_agent`][]: Initialize the agent of a node.
- [`suspicion.on_alarm`][]: Handle the expiry of a clause of task D.
- [`suspicion.on_message`][]: Handle a message received by task D.
- [`suspicion.task_i_step`][]: Run the periodic check of task I.
- [`suspicion.elect_successor`][]: Elect the successor of a failed coordinator.

## Simulation

- [`suspicion.World`][]: A simulated backbone.
- [`suspicion.SimEvent`][]: An event scheduled by the simulator: deliveries, faults, revivals, reboots.
- [`suspicion.run`][]: Simulate a backbone until a horizon.
- [`suspicion.apply_fault`][]: Inject a fault in a world.
- [`suspicion.global_predicate`][]: Evaluate the global correctness predicate.
- [`suspicion.parse_faultrc`][]: Parse a fault injection script.

## Serializers

- [`suspicion.JSONEncoder`][]: JSON encoder for trace events and messages.
- [`suspicion.json_decoder`][]: JSON decoder for trace events and messages.

## Exceptions

- [`suspicion.SuspicionError`][]: The base exception for all errors of the package.
- [`suspicion.ConfigError`][]: Exception for invalid configurations.
- [`suspicion.FaultScriptError`][]: Exception for invalid fault injection scripts.
- [`suspicion.AlarmError`][]: Base exception for alarm manager errors.
- [`suspicion.AgentError`][]: Exception for invalid agent transitions.
- [`suspicion.SimulationError`][]: Exception for invalid simulations.
"""

from __future__ import annotations

from _suspicion.agent import (
    AgentState,
    become_coordinator,
    describe_start,
    elect_successor,
    init_agent,
    notify_event,
    on_alarm,
    on_message,
    rejoin_agent,
    task_i_step,
)
from _suspicion.alarms import AlarmManager, AlarmSpec, FiredAlarm
from _suspicion.cli import DEFAULT_LOG_LEVEL, get_parser, main, normalize, run_scenario
from _suspicion.config import (
    Config,
    ValidatedConfig,
    config_violations,
    load_config,
    parse_config,
    render_config,
    validate_config,
)
from _suspicion.encoders import JSONEncoder, json_decoder
from _suspicion.enumerations import (
    ClauseKind,
    DeductionKind,
    ElectionStrategy,
    FaultKind,
    MessageKind,
    Role,
    Task,
    TraceFormat,
)
from _suspicion.exceptions import (
    AgentError,
    AlarmError,
    AlarmStateError,
    ConfigError,
    DuplicateAlarmError,
    ElectionError,
    FaultScriptError,
    FaultTargetError,
    SimulationError,
    SuspicionError,
    UnknownAlarmError,
)
from _suspicion.faultrc import FaultScript, load_faultrc, parse_faultrc, render_faultrc
from _suspicion.logger import Logger, get_logger, logger, patch_loggers
from _suspicion.models import (
    Action,
    Broadcast,
    CancelAlarm,
    Clause,
    Deduce,
    Deduction,
    FaultSpec,
    Message,
    Milestone,
    RecoveryHook,
    RegisterAlarm,
    RestartAlarm,
    ReviveLocalD,
    Send,
    outranks,
)
from _suspicion.simulation import (
    Deliver,
    FaultTrigger,
    NodeRecord,
    Notify,
    PredicateReport,
    RebootComplete,
    ReviveComplete,
    SimEvent,
    SimEventKind,
    SlowdownOver,
    Trace,
    TraceEvent,
    World,
    apply_fault,
    format_time,
    global_predicate,
    run,
)
from _suspicion.tests import (
    AlarmOperation,
    TmpScenario,
    brute_force_alarms,
    replay_alarms,
    temporary_scenario,
)

__all__ = [
    "DEFAULT_LOG_LEVEL",
    "Action",
    "AgentError",
    "AgentState",
    "AlarmError",
    "AlarmManager",
    "AlarmOperation",
    "AlarmSpec",
    "AlarmStateError",
    "Broadcast",
    "CancelAlarm",
    "Clause",
    "ClauseKind",
    "Config",
    "ConfigError",
    "Deduce",
    "Deduction",
    "DeductionKind",
    "Deliver",
    "DuplicateAlarmError",
    "ElectionError",
    "ElectionStrategy",
    "FaultKind",
    "FaultScript",
    "FaultScriptError",
    "FaultSpec",
    "FaultTargetError",
    "FaultTrigger",
    "FiredAlarm",
    "JSONEncoder",
    "Logger",
    "Message",
    "MessageKind",
    "Milestone",
    "NodeRecord",
    "Notify",
    "PredicateReport",
    "RebootComplete",
    "RecoveryHook",
    "RegisterAlarm",
    "RestartAlarm",
    "ReviveComplete",
    "ReviveLocalD",
    "Role",
    "Send",
    "SimEvent",
    "SimEventKind",
    "SimulationError",
    "SlowdownOver",
    "SuspicionError",
    "Task",
    "TmpScenario",
    "Trace",
    "TraceEvent",
    "TraceFormat",
    "UnknownAlarmError",
    "ValidatedConfig",
    "World",
    "apply_fault",
    "become_coordinator",
    "brute_force_alarms",
    "config_violations",
    "describe_start",
    "elect_successor",
    "format_time",
    "get_logger",
    "get_parser",
    "global_predicate",
    "init_agent",
    "json_decoder",
    "load_config",
    "load_faultrc",
    "logger",
    "main",
    "normalize",
    "notify_event",
    "on_alarm",
    "on_message",
    "outranks",
    "parse_config",
    "parse_faultrc",
    "patch_loggers",
    "rejoin_agent",
    "render_config",
    "render_faultrc",
    "replay_alarms",
    "run",
    "run_scenario",
    "task_i_step",
    "temporary_scenario",
    "validate_config",
]
