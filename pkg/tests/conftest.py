import math

import numpy as np
import pytest

from sfqdrag import (
    ClockConfig,
    SearchSpace,
    TargetGate,
    build_model,
    calibrate,
    search,
    two_level_model,
)

TWO_PI = 2.0 * math.pi
OMEGA_01 = TWO_PI * 5e9
ALPHA = TWO_PI * 250e6


@pytest.fixture(scope="session")
def spec():
    return calibrate(OMEGA_01, ALPHA)


@pytest.fixture(scope="session")
def model(spec):
    return build_model(spec)


@pytest.fixture(scope="session")
def two_level():
    return two_level_model(OMEGA_01)


@pytest.fixture(scope="session")
def best_pi_4x_by_cycles(model):
    """Winning R_Y(pi) search results on the 4x clock, ramp lengths 0..5."""
    clock = ClockConfig.for_model(model, 4)
    target = TargetGate.y_rotation(math.pi)
    results = {}
    for n in range(6):
        results[n] = search(model, target, SearchSpace(clock=clock, ramp_cycles=n))
    return results


@pytest.fixture(scope="session")
def best_pi_8x_5c(model):
    clock = ClockConfig.for_model(model, 8)
    target = TargetGate.y_rotation(math.pi)
    return search(model, target, SearchSpace(clock=clock, ramp_cycles=5))


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
