"""`lcg solve {ne|pareto|ce}` - equilibrium points."""
import logging
from argparse import Namespace
from pathlib import Path
from typing import Optional

from lcg.commands.common import add_common_arguments, resolve_scenario, timed
from lcg.services.conjecture import conjecture_service
from lcg.services.equilibria import equilibrium_solver
from shared.schemas import RunReport

logger = logging.getLogger(__name__)

KINDS = ("ne", "pareto", "ce")


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("solve", help="Compute a Nash, Pareto or conjectural equilibrium")
    parser.add_argument("kind", choices=KINDS)
    add_common_arguments(parser)
    parser.add_argument("--sweep", type=Path, default=None, help="Solve every scenario in a directory")
    parser.set_defaults(handler=run)


def run(args: Namespace, path: Optional[Path] = None) -> RunReport:
    scenario = resolve_scenario(args, path)
    with timed() as clock:
        spec = scenario.to_game_spec()
        if args.kind == "ne":
            result = equilibrium_solver.nash(spec)
        elif args.kind == "pareto":
            result = equilibrium_solver.pareto(spec, scenario.to_weights())
        else:
            result = conjecture_service.ce_closed_form(spec, scenario.to_beliefs())
    logger.info(f"solve {args.kind} finished in {clock['ms']:.3f} ms")
    return RunReport(
        command=f"solve {args.kind}",
        scenario_path=str(path or args.scenario),
        scenario=scenario,
        equilibrium=result,
        duration_ms=clock["ms"],
    )
