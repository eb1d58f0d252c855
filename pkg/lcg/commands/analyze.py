"""`lcg analyze {stability|poa|conservativeness}`."""
import logging
from argparse import Namespace
from pathlib import Path
from typing import Optional

from lcg.commands.common import add_common_arguments, resolve_scenario, timed
from lcg.services.conjecture import conjecture_service
from lcg.services.dynamics import dynamics_service
from lcg.services.equilibria import equilibrium_solver
from shared.schemas import RunReport

logger = logging.getLogger(__name__)

KINDS = ("stability", "poa", "conservativeness")


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("analyze", help="Stability, price of anarchy or conservativeness")
    parser.add_argument("kind", choices=KINDS)
    add_common_arguments(parser)
    parser.add_argument("--sweep", type=Path, default=None, help="Analyze every scenario in a directory")
    parser.set_defaults(handler=run)


def run(args: Namespace, path: Optional[Path] = None) -> RunReport:
    scenario = resolve_scenario(args, path)
    results = {}
    with timed() as clock:
        spec = scenario.to_game_spec()
        if args.kind == "stability":
            results["stability"] = dynamics_service.stability_analysis(spec, scenario.to_beliefs())
        elif args.kind == "poa":
            results["poa"] = equilibrium_solver.price_of_anarchy(spec, scenario.to_weights())
        else:
            results["conservativeness"] = conjecture_service.conservativeness(spec, scenario.to_beliefs())
    logger.info(f"analyze {args.kind} finished in {clock['ms']:.3f} ms")
    return RunReport(
        command=f"analyze {args.kind}",
        scenario_path=str(path or args.scenario),
        scenario=scenario,
        epsilon=args.epsilon if args.kind == "stability" else None,
        duration_ms=clock["ms"],
        **results,
    )
