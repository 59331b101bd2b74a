"""Main entry for the meandim command line."""

import argparse
import json
import logging
import os
import re
import sys
import tempfile
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import sentry_sdk
from pydantic import ValidationError

from .config import (
    load_group,
    load_instance,
    load_measure,
    load_shift,
    parse_config,
    parse_run,
)
from .enums import Command, OutputFormat
from .exceptions import ConfigParseError, MeanDimException
from .model import Budget, RunConfig
from .schema import VersionResponse
from .services import emit, run
from .settings import get_settings
from .xml import read_root

logger = logging.getLogger(__name__)

WINDOW = re.compile(r"^ball:\s*N=(\d+)\s*,\s*M=(\d+)$")
COMMAND_LINE = "<command line>"


def preset_names() -> list[str]:
    """Return the names of the bundled presets."""
    folder = resources.files("meandim") / "presets"
    return sorted(
        Path(entry.name).stem for entry in folder.iterdir() if entry.name.endswith(".xml")
    )


def load_preset(name: str) -> RunConfig:
    """
    Parse a bundled preset.

    Args:
        name (str): The preset name.

    Returns:
        RunConfig: The run.
    """
    if name not in preset_names():
        raise ConfigParseError(
            f"unknown preset {name!r}, expected one of {', '.join(preset_names())}"
        )
    entry = resources.files("meandim") / "presets" / f"{name}.xml"
    with resources.as_file(entry) as path:
        return parse_run(read_root(path, "run"), f"preset:{name}")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--jobs", type=int, help="worker processes for table cells")
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument(
        "--out",
        choices=[item.value for item in OutputFormat],
        help="output format",
    )
    parser.add_argument("-o", "--output", help="output file, stdout when omitted")
    parser.add_argument(
        "-v", "--verbose", action="store_true", default=False, help="debug logging"
    )


def _add_budget(parser: argparse.ArgumentParser, measure: bool = False) -> None:
    parser.add_argument("--group", required=True, help="group config file")
    parser.add_argument("--shift", required=True, help="subshift config file")
    parser.add_argument(
        "--measure", required=measure, help="measure config file"
    )
    parser.add_argument("--N-list", dest="N_list", type=int, nargs="+")
    parser.add_argument("--M-list", dest="M_list", type=int, nargs="+")
    parser.add_argument("--n-list", dest="n_list", type=int, nargs="+")
    parser.add_argument("--n-max", dest="n_max", type=int)
    parser.add_argument("--eps-list", dest="eps_list", type=float, nargs="+")
    parser.add_argument("--delta", type=float)


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="meandim",
        description="Mean dimension, entropy and rate distortion estimators",
    )
    parser.add_argument(
        "--version", action="store_true", help="print tool and spec version"
    )
    commands = parser.add_subparsers(dest="command")

    group = commands.add_parser(Command.GROUP.value, help="growth of a group")
    group.add_argument("--spec", required=True, help="group config file")
    group.add_argument("--n-max", dest="n_max", type=int)
    group.add_argument("--enumerate", action="store_true", default=False)
    group.add_argument("--tempered", action="store_true", default=False)
    _add_common(group)

    count = commands.add_parser(Command.COUNT.value, help="count window patterns")
    count.add_argument("--group", required=True, help="group config file")
    count.add_argument("--shift", required=True, help="subshift config file")
    count.add_argument("--window", required=True, help="ball:N=..,M=..")
    _add_common(count)

    for command in (Command.ENTROPY, Command.MDIM, Command.HDIM, Command.VERIFY_T1):
        sub = commands.add_parser(command.value)
        _add_budget(sub)
        _add_common(sub)
    for command in (Command.RDIM, Command.VERIFY_T2):
        sub = commands.add_parser(command.value)
        _add_budget(sub, measure=True)
        _add_common(sub)

    covering = commands.add_parser(Command.COVERING.value, help="covering lab")
    source = covering.add_mutually_exclusive_group(required=True)
    source.add_argument("--instance", help="covering instance file")
    source.add_argument("--generate", help="generated instance preset")
    _add_common(covering)

    run_parser = commands.add_parser("run", help="run a config file or preset")
    source = run_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="run config file")
    source.add_argument("--preset", help="bundled preset name")
    _add_common(run_parser)

    commands.add_parser("presets", help="list the bundled presets")
    return parser


def _budget(args: argparse.Namespace) -> Budget:
    fields = ("N_list", "M_list", "n_list", "n_max", "eps_list", "delta")
    values: dict[str, Any] = {
        name: getattr(args, name)
        for name in fields
        if getattr(args, name, None) is not None
    }
    window = getattr(args, "window", None)
    if window is not None:
        match = WINDOW.match(window)
        if match is None:
            raise ConfigParseError(
                f"window {window!r} is not of the form ball:N=..,M=..", COMMAND_LINE
            )
        values["window_N"], values["window_M"] = map(int, match.groups())
    return Budget(**values)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """
    Build the run config of a parsed command line.

    Args:
        args (argparse.Namespace): The parsed arguments.

    Returns:
        RunConfig: The run, with command line options overriding file values.
    """
    if args.command == "run":
        config = load_preset(args.preset) if args.preset else parse_config(args.config)
        overrides: dict[str, Any] = {}
    else:
        command = Command(args.command)
        parts: dict[str, Any] = {"command": command, "budget": _budget(args)}
        if command == Command.GROUP:
            parts["group"] = load_group(args.spec)
            parts["enumerate"] = args.enumerate
            parts["tempered"] = args.tempered
        elif command == Command.COVERING:
            if args.instance:
                parts["instance"] = load_instance(args.instance)
            parts["generate"] = args.generate
        else:
            parts["group"] = load_group(args.group)
            parts["shift"] = load_shift(args.shift)
            if getattr(args, "measure", None):
                parts["measure"] = load_measure(args.measure)
        config = RunConfig(**parts)
        overrides = {"jobs": get_settings().JOBS, "seed": get_settings().SEED}
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output_format"] = OutputFormat(args.out)
    if args.output is not None:
        overrides["output_path"] = args.output
    return RunConfig.model_validate({**config.model_dump(), **overrides})


def write_atomically(path: str, content: bytes) -> None:
    """
    Write a file through a temporary sibling renamed into place, so that a
    failed run leaves no partial output.

    Args:
        path (str): The destination.
        content (bytes): The content.
    """
    folder = os.path.dirname(os.path.abspath(path))
    handle, temporary = tempfile.mkstemp(dir=folder, prefix=".meandim-")
    try:
        with os.fdopen(handle, "wb") as file:
            file.write(content)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.unlink(temporary)
        raise


def setup(verbose: bool) -> None:
    """Configure logging and error reporting."""
    settings = get_settings()
    logging.basicConfig(
        level=logging.DEBUG if verbose else settings.LOG_LEVEL,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    sentry_sdk.init(
        dsn=settings.SENTRY_DSN.get_secret_value(),
        # Set traces_sample_rate to 1.0 to capture 100%
        # of transactions for performance monitoring.
        traces_sample_rate=1.0,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run the command line.

    Args:
        argv (Sequence[str] | None): The arguments, `sys.argv[1:]` when None.

    Returns:
        int: The exit code.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.version:
        print(VersionResponse().model_dump_json())
        return 0
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    if args.command == "presets":
        for name in preset_names():
            print(name)
        return 0
    setup(args.verbose)
    try:
        try:
            config = config_from_args(args)
        except ValidationError as error:
            first = error.errors()[0]
            where = ".".join(str(part) for part in first["loc"])
            raise ConfigParseError(f"{where}: {first['msg']}", COMMAND_LINE) from error
        report = run(config)
        content = emit(report, config.output_format)
        if config.output_path:
            write_atomically(config.output_path, content)
        else:
            sys.stdout.buffer.write(content)
            sys.stdout.flush()
    except MeanDimException as error:
        logger.debug("Run failed", exc_info=error)
        print(json.dumps(error.to_dict(), sort_keys=True), file=sys.stderr)
        return error.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
