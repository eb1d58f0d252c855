"""Services package initialization."""
from lcg.services.conjecture import conjecture_service, ConjectureService
from lcg.services.dynamics import dynamics_service, DynamicsService
from lcg.services.equilibria import equilibrium_solver, EquilibriumSolver
from lcg.services.game_model import game_model, GameModel
from lcg.services.numerics import numerics_service, NumericsService
from lcg.services.report_service import report_service, ReportService

__all__ = [
    "conjecture_service",
    "ConjectureService",
    "dynamics_service",
    "DynamicsService",
    "equilibrium_solver",
    "EquilibriumSolver",
    "game_model",
    "GameModel",
    "numerics_service",
    "NumericsService",
    "report_service",
    "ReportService",
]
