# This module contains the alarm manager of task A.
# Clients register time clauses with a deadline, and the manager reports
# every clause that elapsed when its owner advances the clock.
# Time is never read from a wall clock: it is always given by the caller.

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

from _suspicion.enumerations import Task
from _suspicion.exceptions import AlarmStateError, DuplicateAlarmError, UnknownAlarmError

if TYPE_CHECKING:
    from _suspicion.models import Clause


@dataclass(frozen=True)
class AlarmSpec:
    """The specification of an alarm."""

    id: str
    """Identifier, unique among the live alarms of a manager."""
    clause: Clause
    """The managed clause."""
    deadline_in: int
    """Ticks between (re)entry and expiry. For cyclic alarms, this is the period."""
    cyclic: bool = False
    """Whether the alarm is re-entered automatically at each expiry."""
    target_task: Task = Task.D
    """The task the expiry is meant for."""


@dataclass(frozen=True)
class FiredAlarm:
    """The message "clause has elapsed"."""

    id: str
    """The alarm identifier."""
    clause: Clause
    """The elapsed clause."""
    fired_at: int
    """The deadline that elapsed."""
    target_task: Task = Task.D
    """The task the expiry is meant for."""


@dataclass
class _Entry:
    spec: AlarmSpec
    deadline: int | None
    seq: int
    stamp: int = 0


class AlarmManager:
    """An alarm manager, ordering alarms by absolute deadline.

    Alarms with equal deadlines fire in registration order.
    An alarm keeps its rank through restarts, resumptions and cyclic renewals.

    Examples:
        >>> alarms = AlarmManager()
        >>> alarms.register(AlarmSpec("A", clause, deadline_in=3, cyclic=True), now=0)
        'A'
        >>> [fired.fired_at for fired in alarms.advance(7)]
        [3, 6]
    """

    def __init__(self) -> None:
        """Initialize the manager."""
        self._entries: dict[str, _Entry] = {}
        self._heap: list[tuple[int, int, int, str]] = []
        self._seq = 0
        self._stamp = 0

    def __contains__(self, alarm_id: str) -> bool:
        return alarm_id in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def _enter(self, entry: _Entry, deadline: int) -> None:
        # Heap items whose stamp is not the entry's are superseded.
        self._stamp += 1
        entry.deadline = deadline
        entry.stamp = self._stamp
        heapq.heappush(self._heap, (deadline, entry.seq, self._stamp, entry.spec.id))

    def _get(self, alarm_id: str) -> _Entry:
        try:
            return self._entries[alarm_id]
        except KeyError:
            raise UnknownAlarmError(f"no live alarm {alarm_id!r}") from None

    def _head(self) -> tuple[int, int, int, str] | None:
        # Superseded heap items are discarded lazily.
        while self._heap:
            deadline, _, stamp, alarm_id = self._heap[0]
            entry = self._entries.get(alarm_id)
            if entry is not None and entry.stamp == stamp and entry.deadline == deadline:
                return self._heap[0]
            heapq.heappop(self._heap)
        return None

    def register(self, spec: AlarmSpec, now: int) -> str:
        """Register an alarm.

        Parameters:
            spec: The alarm specification.
            now: The current tick.

        Raises:
            DuplicateAlarmError: When an alarm with the same identifier is live.
            AlarmStateError: When the deadline is not in the future.

        Returns:
            The alarm identifier.
        """
        if spec.id in self._entries:
            raise DuplicateAlarmError(f"alarm {spec.id!r} is already registered")
        if spec.deadline_in <= 0:
            raise AlarmStateError(f"alarm {spec.id!r}: deadline_in must be positive, got {spec.deadline_in}")
        self._seq += 1
        entry = _Entry(spec, None, self._seq)
        self._entries[spec.id] = entry
        self._enter(entry, now + spec.deadline_in)
        return spec.id

    def cancel(self, alarm_id: str) -> None:
        """Remove an alarm permanently.

        Parameters:
            alarm_id: The alarm identifier.

        Raises:
            UnknownAlarmError: When no such alarm is live.
        """
        self._get(alarm_id)
        del self._entries[alarm_id]

    def restart(self, alarm_id: str, now: int) -> None:
        """Delete and re-enter an alarm, with a full deadline from now.

        Parameters:
            alarm_id: The alarm identifier.
            now: The current tick.

        Raises:
            UnknownAlarmError: When no such alarm is live.
            AlarmStateError: When the alarm is suspended.
        """
        entry = self._get(alarm_id)
        if entry.deadline is None:
            raise AlarmStateError(f"alarm {alarm_id!r} is suspended")
        self._enter(entry, now + entry.spec.deadline_in)

    def suspend(self, alarm_id: str) -> None:
        """Temporarily disable an alarm.

        Parameters:
            alarm_id: The alarm identifier.

        Raises:
            UnknownAlarmError: When no such alarm is live.
            AlarmStateError: When the alarm is already suspended.
        """
        entry = self._get(alarm_id)
        if entry.deadline is None:
            raise AlarmStateError(f"alarm {alarm_id!r} is already suspended")
        entry.deadline = None

    def resume(self, alarm_id: str, now: int) -> None:
        """Re-enable a suspended alarm, with a full deadline from now.

        Missed periods of suspended cyclic alarms are not accumulated.

        Parameters:
            alarm_id: The alarm identifier.
            now: The current tick.

        Raises:
            UnknownAlarmError: When no such alarm is live.
            AlarmStateError: When the alarm is not suspended.
        """
        entry = self._get(alarm_id)
        if entry.deadline is not None:
            raise AlarmStateError(f"alarm {alarm_id!r} is not suspended")
        self._enter(entry, now + entry.spec.deadline_in)

    def clear(self, predicate: Callable[[AlarmSpec], bool]) -> int:
        """Remove every alarm matching a predicate.

        Parameters:
            predicate: A function called with each alarm specification.

        Returns:
            The number of removed alarms.
        """
        doomed = [alarm_id for alarm_id, entry in self._entries.items() if predicate(entry.spec)]
        for alarm_id in doomed:
            del self._entries[alarm_id]
        return len(doomed)

    def is_suspended(self, alarm_id: str) -> bool:
        """Tell whether an alarm is suspended.

        Parameters:
            alarm_id: The alarm identifier.

        Raises:
            UnknownAlarmError: When no such alarm is live.

        Returns:
            Whether the alarm is suspended.
        """
        return self._get(alarm_id).deadline is None

    def deadline_of(self, alarm_id: str) -> int | None:
        """Return the absolute deadline of an alarm.

        Parameters:
            alarm_id: The alarm identifier.

        Raises:
            UnknownAlarmError: When no such alarm is live.

        Returns:
            The deadline, or none if the alarm is suspended.
        """
        return self._get(alarm_id).deadline

    def next_deadline(self) -> int | None:
        """Return the earliest deadline among active alarms, if any."""
        head = self._head()
        return None if head is None else head[0]

    def pop_due(self, now: int) -> FiredAlarm | None:
        """Fire the earliest alarm if its deadline is not after `now`.

        Parameters:
            now: The current tick.

        Returns:
            The fired alarm, or none if nothing elapsed.
        """
        head = self._head()
        if head is None or head[0] > now:
            return None
        deadline, _, _, alarm_id = heapq.heappop(self._heap)
        entry = self._entries[alarm_id]
        if entry.spec.cyclic:
            self._enter(entry, deadline + entry.spec.deadline_in)
        else:
            del self._entries[alarm_id]
        return FiredAlarm(alarm_id, entry.spec.clause, deadline, entry.spec.target_task)

    def advance(self, now: int) -> list[FiredAlarm]:
        """Fire every alarm whose deadline is not after `now`.

        Cyclic alarms that missed several periods fire once per missed period.

        Parameters:
            now: The current tick.

        Returns:
            The fired alarms, by deadline.
        """
        fired = []
        while (alarm := self.pop_due(now)) is not None:
            fired.append(alarm)
        return fired
