"""
Report service - tabular rendering of results with pandas.

Human tables use `settings.table_decimals`; CSV output uses
`settings.machine_float_format` (12 significant digits).
"""
import logging
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from lcg.config import settings
from lcg.exceptions import ConfigError, OutputError
from lcg.models.game import ValidationReport
from lcg.models.results import (
    ConservativenessProfile,
    EquilibriumResult,
    PoAReport,
    StabilityReport,
    Trajectory,
    UpdateRule,
)
from shared.schemas import RunReport, TrajectoryPayload, TrajectoryRow

logger = logging.getLogger(__name__)


def _users(n: int) -> list[str]:
    return [f"user {i + 1}" for i in range(n)]


def _finite_or_none(values: np.ndarray) -> list[Optional[float]]:
    """JSON has no NaN or infinity; such entries become null."""
    return [float(x) if np.isfinite(x) else None for x in values]


class ReportService:
    """Builds DataFrames for every result type and writes them out."""

    FORMATS = ("table", "json", "csv")

    # ------------------------------------------------------------------
    # Frames
    # ------------------------------------------------------------------

    def equilibrium_frame(self, result: EquilibriumResult) -> pd.DataFrame:
        """Rows a_i and u_i, one column per user (the layout of the NE/PB comparison table)."""
        label = result.kind.value
        return pd.DataFrame(
            [result.actions, result.utilities],
            index=[f"a_i ({label})", f"u_i ({label})"],
            columns=_users(len(result.actions)),
        )

    def trajectory_frame(self, trajectory: Trajectory) -> pd.DataFrame:
        """One row per iterate with columns t, a_1..a_N, u_1..u_N, s_1..s_N."""
        n = trajectory.actions.shape[1]
        frame = pd.DataFrame(
            np.hstack([trajectory.actions, trajectory.utilities, trajectory.states]),
            columns=[f"{name}_{i + 1}" for name in ("a", "u", "s") for i in range(n)],
        )
        frame.insert(0, "t", np.arange(trajectory.actions.shape[0]))
        return frame

    def trajectory_payload(
        self, trajectory: Trajectory, out_path: Optional[str] = None, with_records: bool = False
    ) -> TrajectoryPayload:
        records = []
        if with_records:
            records = [
                TrajectoryRow(t=r.t, a=_finite_or_none(r.a), u=_finite_or_none(r.u), s=_finite_or_none(r.s))
                for r in trajectory.records
            ]
        return TrajectoryPayload(
            rule=trajectory.rule,
            outcome=trajectory.outcome,
            iterations=trajectory.iterations,
            final_actions=_finite_or_none(trajectory.final_actions),
            out_path=out_path,
            records=records,
        )

    def stability_frame(self, report: StabilityReport) -> pd.DataFrame:
        eigen = pd.DataFrame({"eigenvalue": report.spectrum.eigenvalues})
        eigen.index = [f"xi_{i + 1}" for i in range(len(eigen))]
        return eigen

    def stability_values_frame(self, report: StabilityReport, epsilon: Optional[float] = None) -> pd.DataFrame:
        """
        Eigenvalues followed by the verdict rows, all in one numeric `value` column.

        Verdicts are 1 (converges) or 0. The Jacobi rows appear only for a given epsilon.
        """
        rows = {f"xi_{i + 1}": x for i, x in enumerate(report.spectrum.eigenvalues)}
        rows.update(
            {
                "condition_value": report.condition_value,
                "spectral_radius": report.spectrum.spectral_radius,
                "br_converges": float(report.br_converges),
                "jacobi_epsilon_bound": report.jacobi_epsilon_bound,
            }
        )
        if epsilon is not None:
            rows["jacobi_epsilon"] = epsilon
            rows["jacobi_converges"] = float(report.jacobi_converges(epsilon))
        return pd.DataFrame({"value": list(rows.values())}, index=list(rows.keys()))

    def poa_frame(self, report: PoAReport) -> pd.DataFrame:
        return pd.DataFrame(
            {"value": [report.gap, report.gap_evaluated, report.lower_bound, report.upper_bound]},
            index=["gap", "gap (evaluated)", "lower bound", "upper bound"],
        )

    def conservativeness_frame(self, profile: ConservativenessProfile) -> pd.DataFrame:
        return pd.DataFrame([profile.c], index=["tau_n/lambda_n"], columns=_users(len(profile.c)))

    def validation_frame(self, report: ValidationReport) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "passed": [c.passed for c in report.checks],
                "worst residual": [c.worst_residual for c in report.checks],
                "detail": [c.detail for c in report.checks],
            },
            index=[c.name for c in report.checks],
        )

    # ------------------------------------------------------------------
    # Rendering
    # ------------------------------------------------------------------

    def to_table(self, frame: pd.DataFrame) -> str:
        fmt = settings.table_float_format
        return frame.to_string(float_format=lambda x: fmt % x)

    def to_csv(self, frame: pd.DataFrame, index: bool = True) -> str:
        return frame.to_csv(index=index, float_format=settings.machine_float_format)

    def report_frame(self, report: RunReport) -> pd.DataFrame:
        """The main frame of a report (the first result present)."""
        if report.equilibrium is not None:
            return self.equilibrium_frame(report.equilibrium)
        if report.poa is not None:
            return self.poa_frame(report.poa)
        if report.stability is not None:
            return self.stability_frame(report.stability)
        if report.conservativeness is not None:
            return self.conservativeness_frame(report.conservativeness)
        if report.validation is not None:
            return self.validation_frame(report.validation)
        raise ConfigError(f"command '{report.command}' has no tabular result")

    def summary_lines(self, report: RunReport) -> list[str]:
        lines = []
        if report.stability is not None:
            s = report.stability
            lines += [
                f"condition value: {s.condition_value:.{settings.table_decimals}f}",
                f"spectral radius: {s.spectrum.spectral_radius:.{settings.table_decimals}f}",
                f"best response converges: {'yes' if s.br_converges else 'no'}",
                f"jacobi epsilon bound: {s.jacobi_epsilon_bound:.{settings.table_decimals}f}",
            ]
            epsilon = self._jacobi_epsilon(report)
            if epsilon is not None:
                verdict = "yes" if s.jacobi_converges(epsilon) else "no"
                lines.append(f"jacobi converges at epsilon={epsilon:g}: {verdict}")
        if report.poa is not None:
            lines.append(f"lower_bound < gap < 0: {'yes' if report.poa.within_bounds else 'no'}")
        if report.conservativeness is not None:
            c = report.conservativeness
            lines += [
                f"total: {c.total:.{settings.table_decimals}f}",
                f"pareto optimal: {'yes' if c.pareto_optimal else 'no'}",
            ]
        if report.validation is not None:
            v = report.validation
            lines.append(f"A4 branch: {v.a4_branch or 'none'}")
            lines.append(f"all assumptions hold: {'yes' if v.all_passed else 'no'}")
        return lines

    def render(self, report: RunReport, fmt: str) -> str:
        if fmt not in self.FORMATS:
            raise ConfigError(f"unknown format '{fmt}'", field_path="--format")
        if fmt == "json":
            return report.model_dump_json(by_alias=True, indent=2)
        if fmt == "csv":
            if report.stability is not None:
                return self.to_csv(self.stability_values_frame(report.stability, self._jacobi_epsilon(report)))
            return self.to_csv(self.report_frame(report))
        frame = self.report_frame(report)
        return "\n".join([self.to_table(frame), *self.summary_lines(report)])

    def trajectory_summary(self, payload: TrajectoryPayload) -> str:
        final = ", ".join(
            "nan" if x is None else f"{x:.{settings.table_decimals}f}" for x in payload.final_actions
        )
        return f"{payload.outcome.value} after {payload.iterations} iterations; final actions [{final}]"

    @staticmethod
    def _jacobi_epsilon(report: RunReport) -> Optional[float]:
        """An explicit --epsilon, else the stepsize of a Jacobi dynamics section."""
        if report.epsilon is not None:
            return report.epsilon
        dynamics = report.scenario.dynamics
        if dynamics is None or dynamics.rule is not UpdateRule.JACOBI:
            return None
        return dynamics.epsilon

    # ------------------------------------------------------------------
    # Files
    # ------------------------------------------------------------------

    def write_text(self, text: str, path: Path) -> None:
        try:
            Path(path).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        except OSError as exc:
            logger.warning(f"Cannot write {path}: {exc}")
            raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
        logger.debug(f"Wrote {path}")


# Singleton instance
report_service = ReportService()
