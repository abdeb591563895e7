"""Shared fixtures; puts the repository root on sys.path."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))
sys.path.insert(0, str(Path(__file__).parent))

from src.cloakmap import CloakSpec, PlaneWave  # noqa: E402
from src.config import SolverConfig  # noqa: E402


@pytest.fixture
def solver_config():
    return SolverConfig()


@pytest.fixture
def plane_wave():
    return PlaneWave()


@pytest.fixture
def cloak_020():
    """(r, s, t) = (0, 2, 0) cloak with a (2, 1, 0) core at omega = 1."""
    return CloakSpec(rho=0.1, r=0, s=2, t=0, omega=1.0, core={"eps": 2.0, "mu": 1.0, "sigma": 0.0})


@pytest.fixture
def rho_grid():
    return [float(v) for v in np.geomspace(0.1, 0.01, 6)]
