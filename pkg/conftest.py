import numpy as np
import pytest

from config.settings import numerics, settings
from engines.potential import PotentialModel
from system.metrics import metrics


@pytest.fixture(autouse=True)
def fresh_numerics():
    """Knob overrides (--tol, update_setting) must not leak between tests."""
    yield
    numerics.reload()
    metrics.reset()


@pytest.fixture
def no_log_file(monkeypatch):
    monkeypatch.setattr(settings, "LOG_FILE", None)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def trivial_model():
    return PotentialModel.zero()


@pytest.fixture
def constant_model():
    return PotentialModel.constant(0.5, m=1.0, omega=0.7)


@pytest.fixture
def linear_model():
    return PotentialModel.linear(0.8, 0.2, m=0.5, omega=0.3)


@pytest.fixture
def interior_points(rng):
    x = rng.uniform(-0.7, 0.7, 6)
    y = rng.uniform(-0.7, 0.7, 6)
    return x, y
