"""Pytest fixtures and configuration."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
import pytest

from ppps.config import SolverOptions
from ppps.model import Pose, UnitQuaternion
from ppps.singularity import singularity_factors

NONSINGULAR_MARGIN = 0.05


def pytest_addoption(parser: pytest.Parser) -> None:
    """Add custom pytest options."""
    parser.addoption(
        "--full-scale",
        action="store_true",
        default=False,
        help="Run acceptance suites at their full sample counts",
    )


@pytest.fixture(scope="session")
def full_scale(request: pytest.FixtureRequest) -> bool:
    return bool(request.config.getoption("--full-scale"))


@pytest.fixture(scope="session")
def scale(full_scale: bool) -> Callable[[int, int], int]:
    """Pick the full count under --full-scale, the reduced one otherwise."""

    def pick(full: int, reduced: int) -> int:
        return full if full_scale else reduced

    return pick


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator; every test gets the same stream."""
    return np.random.default_rng(20240611)


@pytest.fixture
def options() -> SolverOptions:
    return SolverOptions()


@pytest.fixture
def home_pose() -> Pose:
    return Pose.home()


def random_unit_quaternion(rng: np.random.Generator) -> UnitQuaternion:
    return UnitQuaternion.from_array(rng.normal(size=4), normalize=True)


def random_nonsingular_pose(rng: np.random.Generator, margin: float = NONSINGULAR_MARGIN) -> Pose:
    """Random pose whose factored singularity product exceeds ``margin``."""
    while True:
        q = random_unit_quaternion(rng)
        if abs(math.prod(singularity_factors(q))) > margin:
            x, y, z = rng.uniform(-1.0, 1.0, size=3)
            return Pose(x, y, z, q)


@pytest.fixture
def pose_factory(rng: np.random.Generator) -> Callable[[], Pose]:
    """Draw random nonsingular poses from the seeded generator."""
    return lambda: random_nonsingular_pose(rng)


@pytest.fixture
def quaternion_factory(rng: np.random.Generator) -> Callable[[], UnitQuaternion]:
    """Draw uniformly distributed unit quaternions from the seeded generator."""
    return lambda: random_unit_quaternion(rng)
