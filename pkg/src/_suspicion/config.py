# This module contains the configuration of a backbone:
# the node count, the initial coordinator, the tick resolution and every protocol timeout.
# Configuration scripts are flat `KEY value` lines with `#` comments.

from __future__ import annotations

import re
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from _suspicion.enumerations import ElectionStrategy
from _suspicion.exceptions import ConfigError

_INTEGER = re.compile(r"[+-]?\d+")


@dataclass(frozen=True)
class Config:
    """The configuration of a backbone.

    Every duration is expressed in clock ticks.
    """

    nodes: int = 4
    """Number of nodes, labeled from 0 to `nodes - 1`."""
    coordinator: int = 0
    """The node hosting the initial coordinator."""
    tick_ns: int = 1000
    """Real duration of one clock tick, in nanoseconds."""
    mia_send: int = 100_000
    """Period of the coordinator's MIA heartbeats."""
    mia_recv: int = 300_000
    """How long an assistant waits for a sign of life of the coordinator."""
    taia_send: int = 100_000
    """Period of the assistants' TAIA heartbeats."""
    taia_recv: int = 300_000
    """How long the coordinator waits for a sign of life of an assistant."""
    im_alive_set: int = 50_000
    """Period at which task D sets its "I'm alive" flag."""
    im_alive_clear: int = 150_000
    """Period at which task I checks and clears the "I'm alive" flag."""
    teif_recv: int = 500_000
    """Length of a suspicion period."""
    revive_delay: int = 200_000
    """Ticks before the revival of a crashed task D completes (0 disables revival)."""
    node_reboot_delay: int = 0
    """Ticks before a crashed node reboots (0 means never)."""
    max_latency: int = 10_000
    """Upper bound on the delay of a message, in ticks."""
    seed: int = 0
    """Default seed of the latency generator."""
    election: ElectionStrategy = ElectionStrategy.SKIP
    """How a successor is chosen when the coordinator fails."""


_KEYS: dict[str, str] = {field.name.upper(): field.name for field in fields(Config)}
"""Script keys, in canonical order, mapped to field names."""

_TIMEOUTS = ("MIA_SEND", "MIA_RECV", "TAIA_SEND", "TAIA_RECV", "IM_ALIVE_SET", "IM_ALIVE_CLEAR", "TEIF_RECV")


@dataclass(frozen=True)
class ValidatedConfig:
    """A configuration known to satisfy every timeout inequality.

    Attributes of the wrapped configuration are readable directly:
    `validated.mia_send` is `validated.config.mia_send`.
    """

    config: Config
    """The wrapped configuration."""
    ams_enabled: bool
    """Whether mutual suspicion runs at all (it needs more than one node)."""

    def __getattr__(self, name: str) -> Any:
        if name == "config":
            raise AttributeError(name)
        return getattr(self.config, name)


def config_violations(config: Config) -> list[str]:
    """Return the inequalities a configuration violates.

    Parameters:
        config: The configuration to check.

    Returns:
        The violated inequalities, as human-readable strings. Empty when the configuration is valid.
    """
    violations = []
    if config.nodes < 1:
        violations.append("NODES >= 1")
    if not 0 <= config.coordinator < config.nodes:
        violations.append("0 <= COORDINATOR < NODES")
    if config.tick_ns < 1:
        violations.append("TICK_NS >= 1")
    if config.max_latency < 1:
        violations.append("MAX_LATENCY >= 1")
    violations.extend(f"{key} >= 1" for key in _TIMEOUTS if getattr(config, _KEYS[key]) < 1)
    violations.extend(
        f"{key} >= 0" for key in ("REVIVE_DELAY", "NODE_REBOOT_DELAY", "SEED") if getattr(config, _KEYS[key]) < 0
    )
    if not config.mia_send + config.max_latency < config.mia_recv:
        violations.append("MIA_SEND + MAX_LATENCY < MIA_RECV")
    if not config.taia_send + config.max_latency < config.taia_recv:
        violations.append("TAIA_SEND + MAX_LATENCY < TAIA_RECV")
    if not config.im_alive_set < config.im_alive_clear:
        violations.append("IM_ALIVE_SET < IM_ALIVE_CLEAR")
    if not config.teif_recv > config.im_alive_clear + config.max_latency:
        violations.append("TEIF_RECV > IM_ALIVE_CLEAR + MAX_LATENCY")
    return violations


def validate_config(config: Config) -> ValidatedConfig:
    """Validate a configuration.

    A single-node configuration is valid, but mutual suspicion is disabled.

    Parameters:
        config: The configuration to validate.

    Raises:
        ConfigError: When an inequality is violated. The error names every violated inequality.

    Returns:
        The validated configuration.
    """
    violations = config_violations(config)
    if violations:
        raise ConfigError(f"invalid configuration, expected {'; '.join(violations)}", violations=violations)
    return ValidatedConfig(config, ams_enabled=config.nodes > 1)


def parse_config(text: str) -> Config:
    """Parse a configuration script.

    Keys are case-insensitive. Later occurrences of a key override earlier ones.
    Keys absent from the script keep their default value.

    Examples:
        >>> parse_config("NODES 4\\nCOORDINATOR 0  # node zero hosts the coordinator")
        Config(nodes=4, coordinator=0, ...)

    Parameters:
        text: The contents of the script.

    Raises:
        ConfigError: On unknown keys, malformed values, or violated inequalities.

    Returns:
        The configuration.
    """
    values: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()  # noqa: PLW2901
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:  # noqa: PLR2004
            raise ConfigError(f"expected 'KEY value', got {line!r}", lineno=lineno)
        key, value = parts[0].upper(), parts[1]
        if key not in _KEYS:
            raise ConfigError(f"unknown key {parts[0]!r}", lineno=lineno)
        if key == "ELECTION":
            try:
                values["election"] = ElectionStrategy(value.upper())
            except ValueError:
                choices = ", ".join(strategy.value for strategy in ElectionStrategy)
                raise ConfigError(f"invalid ELECTION {value!r}, expected one of {choices}", lineno=lineno) from None
        elif _INTEGER.fullmatch(value):
            values[_KEYS[key]] = int(value)
        else:
            raise ConfigError(f"{key} expects an integer, got {value!r}", lineno=lineno)
    config = Config(**values)
    validate_config(config)
    return config


def render_config(config: Config) -> str:
    """Render a configuration as a script, one key per line in canonical order.

    Parameters:
        config: The configuration to render.

    Returns:
        The script.
    """
    lines = []
    for key, name in _KEYS.items():
        value = getattr(config, name)
        lines.append(f"{key} {value.value if isinstance(value, ElectionStrategy) else value}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path) -> Config:
    """Load and parse a configuration script.

    Parameters:
        path: The path of the script.

    Raises:
        ConfigError: When the script is invalid.
        OSError: When the file cannot be read.

    Returns:
        The configuration.
    """
    return parse_config(Path(path).read_text(encoding="utf-8"))
