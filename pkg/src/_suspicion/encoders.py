# This module contains the JSON encoder and decoder for trace events and messages,
# used by the JSON lines output of the CLI.

from __future__ import annotations

import json
from decimal import Decimal
from typing import Any, Callable

from _suspicion.enumerations import MessageKind, Task
from _suspicion.models import Message
from _suspicion.simulation import TraceEvent

_json_encoder_map: dict[type, Callable[[Any], Any]] = {
    set: sorted,
    frozenset: sorted,
}

_TRACE_EVENT_KEYS = frozenset({"event_id", "time", "node", "task", "text"})


class JSONEncoder(json.JSONEncoder):
    """JSON encoder.

    JSON encoders can be used directly, or through
    the [`json.dump`][] or [`json.dumps`][] methods.

    Examples:
        >>> from suspicion import JSONEncoder
        >>> JSONEncoder(tick_ns=1000).encode(event)

        >>> import json
        >>> from suspicion import JSONEncoder
        >>> json.dumps(event, cls=JSONEncoder, tick_ns=1000)
    """

    def __init__(
        self,
        *args: Any,
        tick_ns: int = 1000,
        **kwargs: Any,
    ) -> None:
        """Initialize the encoder.

        Parameters:
            *args: See [`json.JSONEncoder`][].
            tick_ns: The duration of a tick, in nanoseconds, used to print trace times in seconds.
            **kwargs: See [`json.JSONEncoder`][].
        """
        super().__init__(*args, **kwargs)
        self.tick_ns: int = tick_ns
        """The duration of a tick, in nanoseconds."""

    def default(self, obj: Any) -> Any:
        """Return a serializable representation of the given object.

        Parameters:
            obj: The object to serialize.

        Returns:
            A serializable representation.
        """
        try:
            return obj.as_dict(tick_ns=self.tick_ns)
        except AttributeError:
            return _json_encoder_map.get(type(obj), super().default)(obj)


def _load_trace_event(obj_dict: dict[str, Any], tick_ns: int) -> TraceEvent:
    at = Decimal(obj_dict["time"]) * 1_000_000_000 / tick_ns
    return TraceEvent(obj_dict["event_id"], int(at), obj_dict["node"], Task(obj_dict["task"]), obj_dict["text"])


def _load_message(obj_dict: dict[str, Any]) -> Message:
    view = obj_dict.get("view")
    return Message(
        MessageKind(obj_dict["kind"]),
        obj_dict["sender"],
        Task(obj_dict["task"]),
        obj_dict["epoch"],
        obj_dict["sent_at"],
        coordinator=obj_dict.get("coordinator"),
        view=None if view is None else frozenset(view),
    )


def json_decoder(obj_dict: dict[str, Any], tick_ns: int = 1000) -> dict[str, Any] | TraceEvent | Message:
    """Decode dictionaries as data classes.

    Trace times are printed with a microsecond resolution,
    so decoded ticks are exact only when ticks last at least a microsecond.

    Examples:
        >>> import json
        >>> from suspicion import json_decoder
        >>> json.loads(line, object_hook=json_decoder)

    Parameters:
        obj_dict: The dictionary to decode.
        tick_ns: The duration of a tick, in nanoseconds.

    Returns:
        An instance of a data class.
    """
    if _TRACE_EVENT_KEYS == obj_dict.keys():
        return _load_trace_event(obj_dict, tick_ns)
    if {"kind", "sender", "task", "epoch", "sent_at"} <= obj_dict.keys():
        return _load_message(obj_dict)
    return obj_dict
