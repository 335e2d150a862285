import numpy as np
import pytest

from dopslam.config import (
    default_clutter_region,
    default_motion,
    default_scenario,
    default_sensor,
    default_ue_cov,
    default_ue_init,
)
from dopslam.errors import DegenerateGeometry
from dopslam.geometry import UEState


@pytest.fixture(scope="session")
def scenario():
    return default_scenario()


@pytest.fixture(scope="session")
def motion():
    return default_motion()


@pytest.fixture(scope="session")
def sensor():
    return default_sensor()


@pytest.fixture(scope="session")
def ue_init():
    return default_ue_init()


@pytest.fixture(scope="session")
def ue_cov():
    return default_ue_cov()


@pytest.fixture(scope="session")
def clutter_region():
    return default_clutter_region()


def random_pose(rng, radius=150.0):
    """UE pose inside the deployment disc with random heading and bias."""
    r = radius * np.sqrt(rng.random())
    phi = rng.uniform(-np.pi, np.pi)
    return UEState(r * np.cos(phi), r * np.sin(phi),
                   rng.uniform(-np.pi, np.pi), rng.uniform(0.0, 400.0))


def random_visible_pose(rng, landmark, bs_pos, radius=150.0, max_tries=200):
    """A pose for which the landmark's path geometry is non-degenerate."""
    from dopslam.geometry import measure

    for _ in range(max_tries):
        ue = random_pose(rng, radius)
        try:
            measure(landmark, ue, 22.22, bs_pos)
            return ue
        except DegenerateGeometry:
            continue
    raise RuntimeError("could not sample a non-degenerate pose")
