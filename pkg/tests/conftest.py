import hypothesis
import pytest

from core.analytic import ScenarioParams
from core.montecarlo import SimConfig

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile("default")


@pytest.fixture
def p_greater_q() -> ScenarioParams:
    """p > q scenario: p=4, q=2, unit rates."""
    return ScenarioParams(p=4.0, q=2.0)


@pytest.fixture
def p_less_q() -> ScenarioParams:
    """p < q scenario: p=2, q=4, unit rates."""
    return ScenarioParams(p=2.0, q=4.0)


@pytest.fixture
def general_rates() -> ScenarioParams:
    """Non-unit rates, where the λ₁/λ₂ placement in the density matters."""
    return ScenarioParams(p=4.0, q=2.0, sigma2=1.5, lambda1=2.0, lambda2=0.5)


@pytest.fixture
def small_sim() -> SimConfig:
    return SimConfig(samples=200_000, seed=12345, workers=2, bins=50)
