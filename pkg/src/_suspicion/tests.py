# This module contains helpers. They simplify programmatic use of the simulator,
# for example to write scripts in temporary files or to cross-check the alarm manager.
# They are particularly useful for our own tests suite.

from __future__ import annotations

import tempfile
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from textwrap import dedent
from typing import TYPE_CHECKING, Any

from _suspicion.alarms import AlarmManager, AlarmSpec, FiredAlarm
from _suspicion.config import Config, render_config
from _suspicion.faultrc import render_faultrc

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator

    from _suspicion.models import FaultSpec

_TMPDIR_PREFIX = "suspicion_"

AlarmOperation = tuple[int, str, Any]
"""An operation on an alarm manager: `(tick, name, argument)`.

Names are `register` (the argument is an [`AlarmSpec`][suspicion.AlarmSpec]),
`cancel`, `restart`, `suspend` and `resume` (the argument is an alarm identifier),
and `advance` (the argument is ignored).
"""


@dataclass
class TmpScenario:
    """A scenario written in a temporary directory."""

    tmpdir: Path
    """The temporary directory containing the scripts."""
    config_path: Path | None
    """The configuration script, if any."""
    faultrc_path: Path | None
    """The fault injection script, if any."""


@contextmanager
def temporary_scenario(
    config: str | Config | None = None,
    faults: str | Iterable[FaultSpec] | None = None,
) -> Iterator[TmpScenario]:
    """Write a configuration script and a fault injection script in a temporary directory.

    Parameters:
        config: The configuration, as a script or as an object.
        faults: The faults, as a script or as objects.

    Yields:
        The scenario paths.
    """
    with tempfile.TemporaryDirectory(prefix=_TMPDIR_PREFIX) as tmpdir:
        tmp = Path(tmpdir)
        config_path = faultrc_path = None
        if config is not None:
            config_path = tmp / "backbone.conf"
            text = render_config(config) if isinstance(config, Config) else dedent(config)
            config_path.write_text(text, encoding="utf-8")
        if faults is not None:
            faultrc_path = tmp / ".faultrc"
            text = dedent(faults) if isinstance(faults, str) else render_faultrc(faults)
            faultrc_path.write_text(text, encoding="utf-8")
        yield TmpScenario(tmp, config_path, faultrc_path)


def _apply_operation(manager: AlarmManager, name: str, argument: Any, now: int) -> None:
    if name == "register":
        manager.register(argument, now)
    elif name == "cancel":
        manager.cancel(argument)
    elif name == "restart":
        manager.restart(argument, now)
    elif name == "suspend":
        manager.suspend(argument)
    elif name == "resume":
        manager.resume(argument, now)
    elif name != "advance":
        raise ValueError(f"unknown alarm operation {name!r}")


def replay_alarms(operations: Iterable[AlarmOperation], manager: AlarmManager | None = None) -> list[FiredAlarm]:
    """Replay operations on an alarm manager.

    Before each operation, every alarm due at its tick fires.

    Parameters:
        operations: The operations, by non-decreasing tick.
        manager: The manager. By default, a new one.

    Returns:
        The fired alarms, in firing order.
    """
    manager = manager or AlarmManager()
    fired: list[FiredAlarm] = []
    for now, name, argument in operations:
        fired.extend(manager.advance(now))
        _apply_operation(manager, name, argument, now)
    return fired


def brute_force_alarms(operations: Iterable[AlarmOperation]) -> list[FiredAlarm]:
    """Replay operations on a naive model of the alarm manager, scanning every tick.

    The model keeps no heap: at each tick it fires the due alarms by registration order.
    It is slow, and serves as an oracle for [`replay_alarms`][suspicion.replay_alarms].

    Parameters:
        operations: The operations, by non-decreasing tick.

    Returns:
        The fired alarms, in firing order.
    """
    # id -> [spec, deadline or None, registration order]
    alarms: dict[str, list[Any]] = {}
    registrations = 0
    clock = 0
    fired: list[FiredAlarm] = []

    def enter(alarm_id: str, deadline: int) -> None:
        alarms[alarm_id][1] = deadline

    for now, name, argument in operations:
        while clock < now:
            clock += 1
            due = sorted(
                (entry[2], alarm_id) for alarm_id, entry in alarms.items() if entry[1] == clock
            )
            for _, alarm_id in due:
                spec: AlarmSpec = alarms[alarm_id][0]
                fired.append(FiredAlarm(alarm_id, spec.clause, clock, spec.target_task))
                if spec.cyclic:
                    enter(alarm_id, clock + spec.deadline_in)
                else:
                    del alarms[alarm_id]

        if name == "register":
            registrations += 1
            alarms[argument.id] = [argument, None, registrations]
            enter(argument.id, now + argument.deadline_in)
        elif name == "cancel":
            del alarms[argument]
        elif name == "suspend":
            alarms[argument][1] = None
        elif name in {"restart", "resume"}:
            enter(argument, now + alarms[argument][0].deadline_in)
    return fired
