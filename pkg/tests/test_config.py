"""Tests for the `config` module."""

from __future__ import annotations

from dataclasses import replace

import pytest

from suspicion import (
    Config,
    ConfigError,
    ElectionStrategy,
    config_violations,
    load_config,
    parse_config,
    render_config,
    validate_config,
)
from tests import FIXTURES_DIR


def test_defaults_are_valid() -> None:
    """The default configuration satisfies every inequality."""
    assert config_violations(Config()) == []
    validated = validate_config(Config())
    assert validated.ams_enabled
    assert validated.mia_recv == 300_000


def test_single_node_disables_mutual_suspicion() -> None:
    """A single node is a valid backbone, without mutual suspicion."""
    assert not validate_config(Config(nodes=1)).ams_enabled


@pytest.mark.parametrize(
    ("changes", "violation"),
    [
        ({"mia_send": 300_000}, "MIA_SEND + MAX_LATENCY < MIA_RECV"),
        ({"taia_recv": 110_000}, "TAIA_SEND + MAX_LATENCY < TAIA_RECV"),
        ({"im_alive_set": 150_000}, "IM_ALIVE_SET < IM_ALIVE_CLEAR"),
        ({"teif_recv": 160_000}, "TEIF_RECV > IM_ALIVE_CLEAR + MAX_LATENCY"),
        ({"nodes": 0, "coordinator": 0}, "NODES >= 1"),
        ({"coordinator": 4}, "0 <= COORDINATOR < NODES"),
        ({"tick_ns": 0}, "TICK_NS >= 1"),
        ({"revive_delay": -1}, "REVIVE_DELAY >= 0"),
        ({"max_latency": 0}, "MAX_LATENCY >= 1"),
    ],
)
def test_violations_are_named(changes: dict, violation: str) -> None:
    """Each violated inequality is named in the error.

    Parameters:
        changes: Configuration values to change.
        violation: The expected violation.
    """
    config = replace(Config(), **changes)
    assert violation in config_violations(config)
    with pytest.raises(ConfigError, match="invalid configuration") as exc_info:
        validate_config(config)
    assert violation in exc_info.value.violations


def test_every_violation_is_reported() -> None:
    """Validation does not stop at the first violation."""
    config = Config(mia_send=500_000, im_alive_set=200_000)
    assert config_violations(config) == ["MIA_SEND + MAX_LATENCY < MIA_RECV", "IM_ALIVE_SET < IM_ALIVE_CLEAR"]


def test_parse_script() -> None:
    """Parse a script with comments, blank lines and mixed case."""
    config = parse_config(
        """
        # a comment
        nodes 3
        Coordinator 2   # inline comment

        TEIF_RECV 600000
        election naive
        """,
    )
    assert config == Config(nodes=3, coordinator=2, teif_recv=600_000, election=ElectionStrategy.NAIVE)


def test_later_keys_override_earlier_ones() -> None:
    """A repeated key keeps its last value."""
    assert parse_config("NODES 3\nNODES 5\n").nodes == 5


@pytest.mark.parametrize(
    ("text", "lineno", "message"),
    [
        ("NODES 4\nFOO 1\n", 2, "unknown key 'FOO'"),
        ("NODES four\n", 1, "NODES expects an integer"),
        ("NODES 4 5\n", 1, "expected 'KEY value'"),
        ("\n\nELECTION random\n", 3, "invalid ELECTION 'random'"),
    ],
)
def test_syntax_errors_carry_line_numbers(text: str, lineno: int, message: str) -> None:
    """Syntax errors report the offending line.

    Parameters:
        text: The script.
        lineno: The expected line number.
        message: The expected message.
    """
    with pytest.raises(ConfigError, match=message) as exc_info:
        parse_config(text)
    assert exc_info.value.lineno == lineno
    assert str(exc_info.value).startswith(f"line {lineno}: ")


def test_parsing_validates() -> None:
    """Parsed configurations are validated."""
    with pytest.raises(ConfigError) as exc_info:
        parse_config("MIA_RECV 100000\n")
    assert exc_info.value.violations == ("MIA_SEND + MAX_LATENCY < MIA_RECV",)
    assert exc_info.value.lineno is None


def test_render_is_canonical() -> None:
    """Rendered configurations list every key in canonical order, and parse back."""
    config = Config(nodes=3, seed=42, election=ElectionStrategy.NAIVE)
    text = render_config(config)
    lines = text.splitlines()
    assert lines[0] == "NODES 3"
    assert lines[-1] == "ELECTION NAIVE"
    assert "SEED 42" in lines
    assert len(lines) == 15
    assert parse_config(text) == config
    assert render_config(parse_config(text)) == text


def test_load_fixture() -> None:
    """Load a configuration file."""
    assert load_config(FIXTURES_DIR / "backbone.conf") == Config()
