"""`lcg simulate` - best-response / Jacobi trajectories."""
import logging
import sys
from argparse import Namespace
from pathlib import Path
from typing import Optional

import numpy as np

from lcg.commands.common import add_common_arguments, resolve_scenario, timed
from lcg.models.game import GameSpec
from lcg.models.results import UpdateRule
from lcg.services.dynamics import dynamics_service
from lcg.services.report_service import report_service
from shared.schemas import RunReport, ScenarioFile

logger = logging.getLogger(__name__)


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("simulate", help="Run belief dynamics and record the trajectory")
    add_common_arguments(parser, formats=("csv", "json"), default_format="csv")
    parser.add_argument("--rule", choices=[r.value for r in UpdateRule], default=None, help="Override update rule")
    parser.set_defaults(handler=run, emits_itself=True)


def random_start(scenario: ScenarioFile, spec: GameSpec, seed: int) -> ScenarioFile:
    """Replace the initial profile by a uniform draw from the action box."""
    if scenario.dynamics is None:
        return scenario
    initial = np.random.default_rng(seed).uniform(spec.lower_array, spec.upper_array)
    section = scenario.dynamics.model_copy(update={"initial": [float(x) for x in initial]})
    logger.debug(f"Random start (seed {seed}): {section.initial}")
    return scenario.model_copy(update={"dynamics": section})


def run(args: Namespace, path: Optional[Path] = None) -> RunReport:
    """
    Write the trajectory (CSV or JSON) to --out, or stdout when absent.

    The one-line summary goes to stdout after a file write, to stderr otherwise.
    """
    scenario = resolve_scenario(args, path)
    spec = scenario.to_game_spec()
    if args.seed is not None:
        scenario = random_start(scenario, spec, args.seed)
    beliefs = scenario.to_beliefs()
    cfg = scenario.to_dynamics_config(spec)
    with timed() as clock:
        trajectory = dynamics_service.run_dynamics(spec, beliefs, cfg)

    out = args.out
    payload = report_service.trajectory_payload(
        trajectory, out_path=str(out) if out else None, with_records=args.format == "json"
    )
    report = RunReport(
        command="simulate",
        scenario_path=str(path or args.scenario),
        scenario=scenario,
        trajectory=payload,
        duration_ms=clock["ms"],
    )

    if args.format == "json":
        text = report.model_dump_json(by_alias=True, indent=2)
    else:
        text = report_service.to_csv(report_service.trajectory_frame(trajectory), index=False)

    summary = report_service.trajectory_summary(payload)
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        print(summary, file=sys.stderr)
    else:
        report_service.write_text(text, out)
        print(summary)
    return report
