"""Configuration for the pytest test suite."""

from __future__ import annotations

import pytest

from suspicion import Config, ValidatedConfig, validate_config


@pytest.fixture
def config() -> ValidatedConfig:
    """Return the default four-node configuration, validated.

    Returns:
        A validated configuration.
    """
    return validate_config(Config())
