import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kmheron.scenes import load_scene
from kmheron.solver import StoppingRule, parse_schedule, solve

settings.register_profile(
    "repro", derandomize=True, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repro")

# Optimal points as printed (4 decimals).
PRINTED_5_1_XS = [(7.0399, 5.2796), (1.9216, 8.0031), (-1.4238, 11.1827), (-6.0103, 7.8565)]
PRINTED_5_1_YS = [(3.0, 3.0), (5.0, 11.0), (-2.0, 7.0)]
PRINTED_5_2_XS = [(-2.4585, 0.6055, 1.2576), (0.8422, 3.3061, 3.2974), (3.3092, 0.5701, 1.4186)]
PRINTED_5_2_YS = [(-2.0, 0.0, -1.0), (2.0, -2.0, -1.0)]


def run_scene(name, **overrides):
    scene = load_scene(name)
    s = scene.solver
    stop = StoppingRule(overrides.get("epsilon", s.epsilon), overrides.get("max_iters", s.max_iters))
    return scene, solve(
        scene.instance(),
        scene.initial_configuration(),
        parse_schedule(overrides.get("schedule", s.schedule)),
        stop,
        check_initial=s.check_initial,
    )


@pytest.fixture(scope="session")
def example_5_1():
    return run_scene("example_5_1")


@pytest.fixture(scope="session")
def example_5_2():
    return run_scene("example_5_2")


@pytest.fixture(scope="session")
def two_ball_toy():
    return run_scene("two_ball_toy")


@pytest.fixture
def rng():
    return np.random.default_rng(20251016)
