"""
Command-line entry point.
lcg - solver for linearly coupled communication games.

Exit codes: 0 success, 1 assumption validation failed, 2 config error,
3 solver error, 4 I/O error, 70 unexpected error.
"""
import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from lcg import __version__
from lcg.commands import analyze, simulate, solve, validate
from lcg.commands.common import SCENARIO_SUFFIXES, emit
from lcg.config import settings
from lcg.exceptions import ConfigError, GameError, OutputError, SolverError
from lcg.services.report_service import report_service
from shared.schemas import RunReport, SweepFailure

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4
EXIT_UNEXPECTED = 70

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcg",
        description="Equilibria, belief dynamics and efficiency bounds of linearly coupled games",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", choices=LOG_LEVELS, default=None, help="Override LCG_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in (solve, simulate, analyze, validate):
        module.add_parser(subparsers)
    return parser


def configure_logging(level: Optional[str]) -> None:
    level_name = (level or settings.log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.WARNING),
        format=settings.log_format,
        stream=sys.stderr,
        force=True,
    )


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, OutputError):
        return EXIT_IO
    if isinstance(exc, SolverError):
        return EXIT_SOLVER
    if isinstance(exc, GameError):
        return EXIT_SOLVER
    return EXIT_UNEXPECTED


def report_exit_code(report: RunReport) -> int:
    if report.validation is not None and not report.validation.all_passed:
        return EXIT_VALIDATION_FAILED
    return EXIT_OK


def run_single(args: argparse.Namespace) -> int:
    report = args.handler(args)
    if not getattr(args, "emits_itself", False):
        emit(report, args.format, args.out)
    return report_exit_code(report)


def run_sweep(args: argparse.Namespace) -> int:
    """Run the command on every scenario in a directory; one JSON document per line."""
    directory: Path = args.sweep
    if not directory.is_dir():
        raise ConfigError("not a directory", field_path="--sweep")
    paths = sorted(p for p in directory.iterdir() if p.suffix.lower() in SCENARIO_SUFFIXES)
    if not paths:
        raise ConfigError("no scenario documents found", field_path="--sweep")

    def process(path: Path) -> tuple[str, int]:
        try:
            report = args.handler(args, path)
            return report.model_dump_json(by_alias=True), report_exit_code(report)
        except GameError as exc:
            code = exit_code_for(exc)
            logger.warning(f"{path}: {exc}")
            return SweepFailure(scenario_path=str(path), exit_code=code, error=str(exc)).model_dump_json(), code

    with ThreadPoolExecutor(max_workers=settings.sweep_workers) as pool:
        results = list(pool.map(process, paths))
    logger.info(f"Sweep over {len(paths)} scenarios in {directory} finished")

    text = "\n".join(line for line, _ in results)
    if args.out is None:
        print(text)
    else:
        report_service.write_text(text, args.out)
    return max(code for _, code in results)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        if getattr(args, "sweep", None) is not None:
            return run_sweep(args)
        return run_single(args)
    except GameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except Exception as exc:  # pylint: disable=broad-except
        logger.error(f"Unexpected error: {exc}", exc_info=True)
        print(f"error: unexpected failure: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
