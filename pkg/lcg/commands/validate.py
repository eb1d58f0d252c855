"""`lcg validate` - numeric check of assumptions A1-A4."""
import logging
from argparse import Namespace
from pathlib import Path
from typing import Optional

from lcg.commands.common import add_common_arguments, resolve_scenario, timed
from lcg.services.game_model import game_model
from shared.schemas import RunReport

logger = logging.getLogger(__name__)


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("validate", help="Check assumptions A1-A4 on sampled points")
    add_common_arguments(parser)
    parser.add_argument("--samples", type=int, default=None, help="Number of interior sample points")
    parser.add_argument("--sweep", type=Path, default=None, help="Validate every scenario in a directory")
    parser.set_defaults(handler=run)


def run(args: Namespace, path: Optional[Path] = None) -> RunReport:
    scenario = resolve_scenario(args, path)
    with timed() as clock:
        report = game_model.validate_assumptions(scenario.to_game_spec(), samples=args.samples, seed=args.seed)
    if not report.all_passed:
        failed = [c.name for c in report.checks if not c.passed]
        logger.warning(f"Assumption validation failed: {', '.join(failed)}")
    return RunReport(
        command="validate",
        scenario_path=str(path or args.scenario),
        scenario=scenario,
        validation=report,
        duration_ms=clock["ms"],
    )
