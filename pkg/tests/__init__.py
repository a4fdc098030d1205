"""Tests suite for `suspicion`."""

from __future__ import annotations

import os
from pathlib import Path

TESTS_DIR = Path(__file__).parent
TMP_DIR = TESTS_DIR / "tmp"
FIXTURES_DIR = TESTS_DIR / "fixtures"
EXHAUSTIVE = os.getenv("SUSPICION_EXHAUSTIVE", "0") == "1"
"""Whether to run acceptance sweeps with their full counts (slow)."""
