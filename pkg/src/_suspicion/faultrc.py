# This module contains the parser of fault injection scripts (`.faultrc` files).
#
# A script is a sequence of statements such as:
#
# ```
# INJECT CRASH ON COMPONENT 1
#   AFTER 5000000 TICKS
# INJECT SLOWDOWN ON COMPONENT 2 AFTER 1000000 TICKS FOR 2000000 TICKS FACTOR 10
# ```
#
# Statements may span several lines. Keywords are case-insensitive.
# Comments start with `#` and run until the end of the line.

from __future__ import annotations

import re
from pathlib import Path
from typing import TYPE_CHECKING

from _suspicion.enumerations import FaultKind, Task
from _suspicion.exceptions import FaultScriptError
from _suspicion.models import FaultSpec

if TYPE_CHECKING:
    from collections.abc import Iterable

FaultScript = list[FaultSpec]
"""An ordered list of faults, in source order."""

_NUMBER = re.compile(r"\d+")
_TARGETS = {"COMPONENT", "ICOMPONENT", "NODE"}


class _Tokens:
    def __init__(self, text: str) -> None:
        self.tokens: list[tuple[str, int]] = []
        for lineno, line in enumerate(text.splitlines(), 1):
            for word in line.split("#", 1)[0].split():
                # A period may end a statement, as in "AFTER 5000000 TICKS."
                if word.upper() == "TICKS.":
                    word = word[:-1]  # noqa: PLW2901
                self.tokens.append((word, lineno))
        self.position = 0
        self.last_line = max(1, len(text.splitlines()))

    def peek(self) -> str | None:
        if self.position < len(self.tokens):
            return self.tokens[self.position][0].upper()
        return None

    @property
    def lineno(self) -> int:
        if self.position < len(self.tokens):
            return self.tokens[self.position][1]
        return self.tokens[-1][1] if self.tokens else self.last_line

    def next(self, expected: str) -> str:
        if self.position >= len(self.tokens):
            raise FaultScriptError(f"unexpected end of script, expected {expected}", self.lineno)
        word = self.tokens[self.position][0]
        self.position += 1
        return word

    def keyword(self, *choices: str) -> str:
        lineno = self.lineno
        expected = " or ".join(choices)
        word = self.next(expected).upper()
        if word not in choices:
            raise FaultScriptError(f"expected {expected}, got {word!r}", lineno)
        return word

    def number(self, what: str, *, minimum: int = 0) -> int:
        lineno = self.lineno
        word = self.next(what)
        if not _NUMBER.fullmatch(word):
            raise FaultScriptError(f"expected {what}, got {word!r}", lineno)
        value = int(word)
        if value < minimum:
            raise FaultScriptError(f"{what} must be at least {minimum}, got {value}", lineno)
        return value


def _statement(tokens: _Tokens) -> FaultSpec:
    tokens.keyword("INJECT")
    kind = tokens.keyword("CRASH", "REBOOT", "SLOWDOWN")
    tokens.keyword("ON")
    target_lineno = tokens.lineno
    target = tokens.keyword(*sorted(_TARGETS))
    node = tokens.number("an identifier")

    if kind == "SLOWDOWN" and target != "COMPONENT":
        raise FaultScriptError(f"SLOWDOWN is only supported ON COMPONENT, not ON {target}", target_lineno)
    if kind == "REBOOT" and target != "NODE":
        raise FaultScriptError(f"REBOOT is only supported ON NODE, not ON {target}", target_lineno)
    if tokens.peek() != "AFTER":
        raise FaultScriptError(f"{kind} statement is missing its AFTER clause", tokens.lineno)
    tokens.keyword("AFTER")
    at = tokens.number("a number of ticks", minimum=1)
    tokens.keyword("TICKS")

    if kind == "SLOWDOWN":
        tokens.keyword("FOR")
        duration = tokens.number("a number of ticks", minimum=1)
        tokens.keyword("TICKS")
        tokens.keyword("FACTOR")
        factor = tokens.number("a factor", minimum=1)
        return FaultSpec(FaultKind.SLOWDOWN, node, at, task=Task.D, duration=duration, factor=factor)
    if tokens.peek() == "FOR":
        raise FaultScriptError(f"FOR is only supported by SLOWDOWN statements, not {kind}", tokens.lineno)

    if kind == "REBOOT":
        return FaultSpec(FaultKind.REBOOT_NODE, node, at)
    if target == "NODE":
        return FaultSpec(FaultKind.CRASH_NODE, node, at)
    if target == "ICOMPONENT":
        return FaultSpec(FaultKind.CRASH_COMPONENT, node, at, task=Task.I)
    return FaultSpec(FaultKind.CRASH_COMPONENT, node, at, task=Task.D)


def parse_faultrc(text: str) -> FaultScript:
    """Parse a fault injection script.

    Parameters:
        text: The contents of the script.

    Raises:
        FaultScriptError: On syntax errors, with the line number of the offending word.

    Returns:
        The faults, in source order.
    """
    tokens = _Tokens(text)
    script: FaultScript = []
    while tokens.peek() is not None:
        script.append(_statement(tokens))
    return script


def render_faultrc(script: Iterable[FaultSpec]) -> str:
    """Render faults as a normalized script, one statement per line.

    Parameters:
        script: The faults.

    Returns:
        The script.
    """
    lines = []
    for spec in script:
        line = f"INJECT {spec.keyword} ON {spec.target_keyword} {spec.target} AFTER {spec.at} TICKS"
        if spec.kind is FaultKind.SLOWDOWN:
            line += f" FOR {spec.duration} TICKS FACTOR {spec.factor}"
        lines.append(line)
    return "".join(f"{line}\n" for line in lines)


def load_faultrc(path: str | Path) -> FaultScript:
    """Load and parse a fault injection script.

    Parameters:
        path: The path of the script.

    Raises:
        FaultScriptError: On syntax errors.
        OSError: When the file cannot be read.

    Returns:
        The faults.
    """
    return parse_faultrc(Path(path).read_text(encoding="utf-8"))
