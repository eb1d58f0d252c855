"""Scenario loading, flag overrides and output helpers shared by all commands."""
import json
import logging
import time
from argparse import ArgumentParser, Namespace
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

import yaml
from pydantic import ValidationError

from lcg.exceptions import ConfigError
from lcg.services.report_service import report_service
from shared.schemas import RunReport, ScenarioFile

logger = logging.getLogger(__name__)

SCENARIO_SUFFIXES = (".yaml", ".yml", ".json")


def config_error(exc: ValidationError, prefix: str = "") -> ConfigError:
    """Turn a pydantic ValidationError into a ConfigError with a dotted field path."""
    messages = []
    first_path = None
    for error in exc.errors():
        path = ".".join(str(part) for part in error["loc"])
        first_path = first_path or path
        messages.append(f"{path}: {error['msg']}" if path else error["msg"])
    if prefix:
        messages[0] = f"{prefix}: {messages[0]}"
    error = ConfigError("; ".join(messages))
    error.field_path = first_path or None
    return error


def load_scenario(path: Path) -> ScenarioFile:
    """
    Read and validate a YAML or JSON scenario document.

    Raises:
        ConfigError: Missing file, unknown suffix, parse error or invalid content
    """
    path = Path(path)
    if path.suffix.lower() not in SCENARIO_SUFFIXES:
        raise ConfigError(f"unsupported scenario format '{path.suffix}'", field_path=str(path))
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario: {exc.strerror or exc}", field_path=str(path)) from exc

    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = yaml.safe_load(text) or {}
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"malformed document: {exc}", field_path=str(path)) from exc
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a mapping", field_path=str(path))

    try:
        scenario = ScenarioFile.model_validate(data)
    except ValidationError as exc:
        raise config_error(exc) from exc
    logger.debug(f"Loaded scenario {path} ({scenario.family.value}, N={len(scenario.beta)})")
    return scenario


def parse_vector(text: str, flag: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got '{text}'", field_path=flag) from exc


def apply_overrides(scenario: ScenarioFile, args: Namespace) -> ScenarioFile:
    """Flags win over scenario-file fields; the result is validated again."""
    data = scenario.model_dump(by_alias=True, mode="json")
    if getattr(args, "weights", None):
        data["weights"] = parse_vector(args.weights, "--weights")
    if getattr(args, "lambda_", None):
        data["lambda"] = parse_vector(args.lambda_, "--lambda")
    dynamics_flags = {
        "epsilon": getattr(args, "epsilon", None),
        "rule": getattr(args, "rule", None),
    }
    if any(value is not None for value in dynamics_flags.values()):
        section = data.get("dynamics") or {}
        section.update({k: v for k, v in dynamics_flags.items() if v is not None})
        data["dynamics"] = section
    try:
        return ScenarioFile.model_validate(data)
    except ValidationError as exc:
        raise config_error(exc) from exc


def resolve_scenario(args: Namespace, path: Optional[Path] = None) -> ScenarioFile:
    path = path or args.scenario
    if path is None:
        raise ConfigError("a scenario document is required", field_path="--scenario")
    return apply_overrides(load_scenario(path), args)


def add_common_arguments(parser: ArgumentParser, formats=("table", "json", "csv"), default_format="table") -> None:
    parser.add_argument("--scenario", type=Path, help="Scenario document (.yaml, .yml or .json)")
    parser.add_argument("--format", choices=formats, default=default_format, help="Output format")
    parser.add_argument("--out", type=Path, default=None, help="Write output to this file instead of stdout")
    parser.add_argument("--weights", default=None, help="Override weights, e.g. 0.5,0.5")
    parser.add_argument("--lambda", dest="lambda_", default=None, help="Override belief slopes, e.g. 9,12,15")
    parser.add_argument("--epsilon", type=float, default=None, help="Jacobi stepsize")
    parser.add_argument(
        "--seed", type=int, default=None, help="Random seed (validate sampling, simulate random start)"
    )


@contextmanager
def timed() -> Iterator[dict]:
    clock = {"ms": 0.0}
    start = time.perf_counter()
    try:
        yield clock
    finally:
        clock["ms"] = (time.perf_counter() - start) * 1000.0


def emit(report: RunReport, fmt: str, out: Optional[Path]) -> None:
    text = report_service.render(report, fmt)
    if out is None:
        print(text)
    else:
        report_service.write_text(text, out)
