# This module contains the command-line interface: `run` simulates a scenario and prints its trace,
# `normalize` prints scripts in canonical form.
# Input errors exit with code 2, a failed global predicate with code 1.

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from decimal import Decimal, InvalidOperation
from typing import TYPE_CHECKING, Any, Callable

import colorama

from _suspicion import debug
from _suspicion.config import Config, load_config, render_config, validate_config
from _suspicion.encoders import JSONEncoder
from _suspicion.enumerations import TraceFormat
from _suspicion.exceptions import SuspicionError
from _suspicion.faultrc import load_faultrc, render_faultrc
from _suspicion.logger import logger
from _suspicion.simulation import World, format_time

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from _suspicion.simulation import PredicateReport, TraceEvent


DEFAULT_LOG_LEVEL = os.getenv("SUSPICION_LOG_LEVEL", "INFO").upper()
"""The default log level for the CLI.

This can be overridden by the `SUSPICION_LOG_LEVEL` environment variable.
"""

_level_choices = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

_COLORS = (
    ("SUSPECT", colorama.Fore.YELLOW),
    ("DEDUCE", colorama.Fore.MAGENTA),
    ("KILLED", colorama.Fore.RED),
    ("INJECT", colorama.Fore.RED),
    ("ELECTED", colorama.Fore.CYAN),
    ("FOLLOW", colorama.Fore.CYAN),
    ("DEMOTED", colorama.Fore.CYAN),
    ("REINTEGRATE", colorama.Fore.GREEN),
    ("REVIVED", colorama.Fore.GREEN),
    ("REBOOTED", colorama.Fore.GREEN),
)


class _DebugInfo(argparse.Action):
    def __init__(self, nargs: int | str | None = 0, **kwargs: Any) -> None:
        super().__init__(nargs=nargs, **kwargs)

    def __call__(self, *args: Any, **kwargs: Any) -> None:  # noqa: ARG002
        debug._print_debug_info()
        sys.exit(0)


def _seconds(value: str) -> Decimal:
    try:
        seconds = Decimal(value)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"invalid number of seconds: {value!r}") from None
    if not seconds.is_finite() or seconds < 0:
        raise argparse.ArgumentTypeError(f"invalid number of seconds: {value!r}")
    return seconds


def _to_ticks(seconds: Decimal, tick_ns: int) -> int:
    return int(seconds * 1_000_000_000 / tick_ns)


def _use_color(color: bool | None) -> bool:
    if color is None and (force_color := os.getenv("FORCE_COLOR", None)) is not None:
        color = force_color.lower() in {"1", "true", "y", "yes", "on"}
    if color is None:
        color = sys.stdout.isatty()
    if color:
        colorama.just_fix_windows_console()
    return color


def _colored_line(event: TraceEvent, tick_ns: int) -> str:
    line = event.as_line(tick_ns)
    for prefix, color in _COLORS:
        if event.text.startswith(prefix):
            return f"{color}{line}{colorama.Style.RESET_ALL}"
    if event.verbose:
        return f"{colorama.Style.DIM}{line}{colorama.Style.RESET_ALL}"
    return line


def _report_line(report: PredicateReport, tick_ns: int) -> str:
    status = "OK" if report.holds else f"FAILED ({'; '.join(report.problems)})"
    return f"predicate at {format_time(report.at, tick_ns)}: {status}"


def get_parser() -> argparse.ArgumentParser:
    """Return the CLI argument parser.

    Returns:
        An argparse parser.
    """
    usage = "%(prog)s [GLOBAL_OPTS...] COMMAND [COMMAND_OPTS...]"
    description = "Simulate crash detection and coordinator failover with the mutual suspicion algorithm."
    parser = argparse.ArgumentParser(add_help=False, usage=usage, description=description, prog="suspicion")

    main_help = "Show this help message and exit. Commands also accept the -h/--help option."
    subcommand_help = "Show this help message and exit."

    global_options = parser.add_argument_group(title="Global options")
    global_options.add_argument("-h", "--help", action="help", help=main_help)
    global_options.add_argument("-V", "--version", action="version", version=f"%(prog)s {debug._get_version()}")
    global_options.add_argument("--debug-info", action=_DebugInfo, help="Print debug information.")

    def add_common_options(subparser: argparse.ArgumentParser) -> None:
        common_options = subparser.add_argument_group(title="Common options")
        common_options.add_argument("-h", "--help", action="help", help=subcommand_help)
        common_options.add_argument(
            "-c",
            "--config",
            dest="config_path",
            metavar="PATH",
            default=None,
            help="Configuration script. Default: built-in defaults.",
        )
        common_options.add_argument(
            "-f",
            "--faultrc",
            dest="faultrc_path",
            metavar="PATH",
            default=None,
            help="Fault injection script. Default: no faults.",
        )
        debug_options = subparser.add_argument_group(title="Debugging options")
        debug_options.add_argument(
            "-L",
            "--log-level",
            metavar="LEVEL",
            default=DEFAULT_LOG_LEVEL,
            choices=_level_choices,
            type=str.upper,
            help="Set the log level: `DEBUG`, `INFO`, `WARNING`, `ERROR`, `CRITICAL`.",
        )

    # ========= SUBPARSERS ========= #
    subparsers = parser.add_subparsers(
        dest="subcommand",
        title="Commands",
        metavar="COMMAND",
        prog="suspicion",
        required=True,
    )

    def add_subparser(command: str, text: str, **kwargs: Any) -> argparse.ArgumentParser:
        return subparsers.add_parser(command, add_help=False, help=text, description=text, **kwargs)

    # ========= RUN PARSER ========= #
    run_parser = add_subparser("run", "Run a scenario and print its trace.")
    run_options = run_parser.add_argument_group(title="Run options")
    run_options.add_argument(
        "-H",
        "--horizon-s",
        metavar="SECONDS",
        type=_seconds,
        default=Decimal(60),
        help="Simulated duration, in seconds. Default: 60.",
    )
    run_options.add_argument(
        "-s",
        "--seed",
        type=int,
        default=None,
        help="Seed of the latency generator. Default: the SEED of the configuration.",
    )
    formats = [fmt.value for fmt in TraceFormat]
    run_options.add_argument(
        "-F",
        "--format",
        dest="trace_format",
        choices=formats,
        default=TraceFormat.TEXT.value,
        help="Trace format.",
    )
    run_options.add_argument("-v", "--verbose", action="store_true", help="Also trace heartbeat messages.")
    run_options.add_argument(
        "-p",
        "--predicate-at",
        metavar="SECONDS",
        action="append",
        type=_seconds,
        default=[],
        help="Also evaluate the global predicate at this instant. Can be repeated.",
    )
    run_options.add_argument(
        "--color",
        dest="color",
        action="store_true",
        default=None,
        help="Force enable colors in the output.",
    )
    run_options.add_argument(
        "--no-color",
        dest="color",
        action="store_false",
        default=None,
        help="Force disable colors in the output.",
    )
    add_common_options(run_parser)

    # ========= NORMALIZE PARSER ========= #
    normalize_parser = add_subparser("normalize", "Print the canonical rendering of scripts.")
    add_common_options(normalize_parser)

    return parser


def run_scenario(
    config_path: str | Path | None = None,
    faultrc_path: str | Path | None = None,
    *,
    horizon_s: Decimal | int = 60,
    seed: int | None = None,
    trace_format: str | TraceFormat = TraceFormat.TEXT,
    verbose: bool = False,
    predicate_at: Sequence[Decimal | int] = (),
    color: bool | None = None,
) -> int:
    """Run a scenario, print its trace on standard output and predicate reports on standard error.

    Parameters:
        config_path: The configuration script. Default: built-in defaults.
        faultrc_path: The fault injection script. Default: no faults.
        horizon_s: The simulated duration, in seconds.
        seed: The seed of the latency generator. Default: the seed of the configuration.
        trace_format: The trace format.
        verbose: Whether to trace heartbeat messages too.
        predicate_at: Additional instants, in seconds, to evaluate the global predicate at.
        color: Whether to color the text trace. Default: only on terminals.

    Returns:
        `0` when the global predicate holds at the horizon, `1` when it does not, `2` on input errors.
    """
    try:
        config = Config() if config_path is None else load_config(config_path)
        validated = validate_config(config)
        faults = [] if faultrc_path is None else load_faultrc(faultrc_path)
        horizon = _to_ticks(Decimal(horizon_s), config.tick_ns)
        if horizon <= 0:
            raise SuspicionError(f"the horizon must last at least one tick, got {horizon_s} seconds")
        instants = sorted({_to_ticks(Decimal(seconds), config.tick_ns) for seconds in predicate_at})
        if instants and instants[-1] > horizon:
            raise SuspicionError(f"cannot evaluate the predicate after the horizon ({horizon_s} seconds)")
        world = World(validated, faults, seed=seed, verbose=verbose)
    except (SuspicionError, OSError) as error:
        print(f"suspicion: error: {error}", file=sys.stderr)
        return 2

    reports = []
    for instant in instants:
        world.run(instant)
        reports.append(world.global_predicate())
    trace = world.run(horizon)
    reports.append(world.global_predicate())

    trace_format = TraceFormat(trace_format)
    use_color = trace_format is TraceFormat.TEXT and _use_color(color)
    for event in trace:
        if event.verbose and not verbose:
            continue
        if trace_format is TraceFormat.JSON:
            print(json.dumps(event, cls=JSONEncoder, tick_ns=config.tick_ns))
        elif use_color:
            print(_colored_line(event, config.tick_ns))
        else:
            print(event.as_line(config.tick_ns))

    for report in reports:
        if not report.holds:
            logger.warning("Global predicate failed at tick %s: %s", report.at, "; ".join(report.problems))
        print(_report_line(report, config.tick_ns), file=sys.stderr)

    return 0 if reports[-1].holds else 1


def normalize(config_path: str | Path | None = None, faultrc_path: str | Path | None = None) -> int:
    """Print the canonical rendering of a configuration script and/or a fault injection script.

    Parameters:
        config_path: The configuration script.
        faultrc_path: The fault injection script.

    Returns:
        `0` for success, `2` on input errors.
    """
    if config_path is None and faultrc_path is None:
        print("suspicion: error: nothing to normalize, pass --config and/or --faultrc", file=sys.stderr)
        return 2
    try:
        rendered = []
        if config_path is not None:
            rendered.append(render_config(load_config(config_path)))
        if faultrc_path is not None:
            rendered.append(render_faultrc(load_faultrc(faultrc_path)))
    except (SuspicionError, OSError) as error:
        print(f"suspicion: error: {error}", file=sys.stderr)
        return 2
    print("\n".join(rendered), end="")
    return 0


def main(args: list[str] | None = None) -> int:
    """Run the main program.

    This function is executed when you type `suspicion` or `python -m suspicion`.

    Parameters:
        args: Arguments passed from the command line.

    Returns:
        An exit code.
    """
    # Parse arguments.
    parser = get_parser()
    opts: argparse.Namespace = parser.parse_args(args)
    opts_dict = opts.__dict__
    opts_dict.pop("debug_info")
    subcommand = opts_dict.pop("subcommand")

    # Initialize logging.
    log_level = opts_dict.pop("log_level", DEFAULT_LOG_LEVEL)
    try:
        level = getattr(logging, log_level)
    except AttributeError:
        choices = "', '".join(_level_choices)
        print(
            f"suspicion: error: invalid log level '{log_level}' (choose from '{choices}')",
            file=sys.stderr,
        )
        return 2
    else:
        logging.basicConfig(format="%(levelname)-10s %(message)s", level=level)

    # Run subcommand.
    commands: dict[str, Callable[..., int]] = {"run": run_scenario, "normalize": normalize}
    return commands[subcommand](**opts_dict)
