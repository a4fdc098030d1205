# This module is here to help users report bugs and share reproducible runs.
# It gathers environment information, along with the defaults a run starts from,
# and is printed thanks to the `--debug-info` CLI flag.

from __future__ import annotations

import os
import platform
import sys
from dataclasses import dataclass, field
from importlib import metadata

from _suspicion.config import Config, render_config

_PACKAGES = ("suspicion", "colorama")
_VARIABLES = ("PYTHONPATH", "FORCE_COLOR")


@dataclass
class _Environment:
    """Dataclass to store environment information."""

    interpreter: str
    """Python interpreter name and version."""
    interpreter_path: str
    """Path to Python executable."""
    platform: str
    """Operating System."""
    packages: dict[str, str] = field(default_factory=dict)
    """Installed packages and their versions."""
    variables: dict[str, str] = field(default_factory=dict)
    """Relevant environment variables that are set."""
    defaults: str = ""
    """The default configuration, as a script."""


def _get_version(dist: str = "suspicion") -> str:
    """Get version of the given distribution.

    Parameters:
        dist: A distribution name.

    Returns:
        A version number.
    """
    try:
        return metadata.version(dist)
    except metadata.PackageNotFoundError:
        return "0.0.0"


def _get_debug_info() -> _Environment:
    """Get debug/environment information.

    Returns:
        Environment information.
    """
    impl = sys.implementation
    version = ".".join(str(part) for part in impl.version[:3])
    if impl.version.releaselevel != "final":
        version += f"{impl.version.releaselevel[0]}{impl.version.serial}"
    names = [*_VARIABLES, *sorted(var for var in os.environ if var.startswith("SUSPICION_"))]
    return _Environment(
        interpreter=f"{impl.name} {version}",
        interpreter_path=sys.executable,
        platform=platform.platform(),
        packages={pkg: _get_version(pkg) for pkg in _PACKAGES},
        variables={var: value for var in names if (value := os.getenv(var))},
        defaults=render_config(Config()),
    )


def _print_debug_info() -> None:
    """Print debug/environment information."""
    info = _get_debug_info()
    print(f"- __System__: {info.platform}")
    print(f"- __Python__: {info.interpreter} ({info.interpreter_path})")
    print("- __Environment variables__:")
    for name, value in info.variables.items():
        print(f"  - `{name}`: `{value}`")
    print("- __Installed packages__:")
    for name, version in info.packages.items():
        print(f"  - `{name}` v{version}")
    print("- __Default configuration__:")
    for line in info.defaults.splitlines():
        print(f"  - `{line}`")
