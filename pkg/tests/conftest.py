from pathlib import Path

import numpy as np
import pytest

from lcg.models.game import GameSpec, Weights

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

TABLE_BETA = (1.5, 1.0, 0.5)
TABLE_TAU = (3.0, 4.0, 5.0)
TABLE_MU = 10.0

NE_ACTIONS = [1.25, 0.625, 0.25]
NE_UTILITIES = [3.4939, 1.5625, 1.25]
PB_ACTIONS = [0.8333, 0.4167, 0.1667]
PB_UTILITIES = [3.8036, 2.0833, 2.0412]


@pytest.fixture
def table_spec() -> GameSpec:
    return GameSpec.type2(beta=TABLE_BETA, tau=TABLE_TAU, mu=TABLE_MU)


@pytest.fixture
def uniform3() -> Weights:
    return Weights.uniform(3)


@pytest.fixture
def pareto_slopes() -> np.ndarray:
    """tau_n / w_n for uniform weights on the three-user game."""
    return np.array(TABLE_TAU) * 3.0


@pytest.fixture
def scenarios_dir() -> Path:
    return SCENARIOS


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240501)


def random_type2_spec(rng: np.random.Generator, n: int, low: float = 0.2, high: float = 5.0) -> GameSpec:
    beta = rng.uniform(low, high, size=n)
    tau = rng.uniform(low, high, size=n)
    mu = float(rng.uniform(1.0, 20.0))
    return GameSpec.type2(beta=beta.tolist(), tau=tau.tolist(), mu=mu)


def random_interior_weights(rng: np.random.Generator, n: int) -> Weights:
    raw = rng.uniform(0.05, 1.0, size=n)
    omega = raw / raw.sum()
    omega[-1] = 1.0 - omega[:-1].sum()
    return Weights(omega=tuple(float(x) for x in omega))
