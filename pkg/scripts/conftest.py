"""Shared fixtures for the shgrav test suite."""
import math
import os
import sys

import numpy as np
import pytest

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from shgrav.density import HalfSpaceDensity, UniformDensity
from shgrav.mesh import icosphere, random_star_mesh, validate_mesh
from shgrav.shcoeff import compute_coefficients

SPHERE_R = 500.0
RHO_SPHERE = 2670.0
RHO_POS, RHO_NEG = 3204.0, 1335.0
# Centre of mass of a sphere made of two homogeneous hemispheres
HALF_SPHERE_X_COM = 3.0 / 8.0 * SPHERE_R * (RHO_POS - RHO_NEG) / (RHO_POS + RHO_NEG)

ASSETS_DIR = os.getenv("SHGRAV_ASSETS", os.path.join(PROJECT_ROOT, "assets"))


def asset_path(name: str) -> str:
    """Path of an optional shape model; skips the calling test when it is missing."""
    path = os.path.join(ASSETS_DIR, name)
    if not os.path.isfile(path):
        pytest.skip(f"asset {name} not found in {ASSETS_DIR} (set SHGRAV_ASSETS)")
    return path


def sphere_volume(r: float) -> float:
    return 4.0 / 3.0 * math.pi * r**3


@pytest.fixture(scope="session")
def sphere_mesh():
    """Icosphere, radius 500 m, 20480 faces."""
    return icosphere(SPHERE_R, subdivisions=5)


@pytest.fixture(scope="session")
def coarse_sphere():
    """Icosphere, radius 500 m, 1280 faces."""
    return icosphere(SPHERE_R, subdivisions=3)


@pytest.fixture(scope="session")
def star_mesh():
    return random_star_mesh(np.random.default_rng(7), radius=1000.0, jitter=0.3)


@pytest.fixture(scope="session")
def unit_simplex():
    """Tetrahedron with vertices at the origin and the three unit points."""
    v = np.array([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)], dtype=float)
    f = np.array([(1, 2, 3), (0, 2, 1), (0, 1, 3), (0, 3, 2)])
    return validate_mesh(v, f)


@pytest.fixture(scope="session")
def uniform_sphere_model(sphere_mesh):
    return compute_coefficients(sphere_mesh, UniformDensity(rho=RHO_SPHERE), nmax=4, n_q=10, R0=SPHERE_R)


@pytest.fixture(scope="session")
def half_sphere_model(sphere_mesh):
    density = HalfSpaceDensity(normal=(1.0, 0.0, 0.0), offset_m=0.0, rho_pos=RHO_POS, rho_neg=RHO_NEG)
    return compute_coefficients(sphere_mesh, density, nmax=4, n_q=10, R0=SPHERE_R)


@pytest.fixture(scope="session")
def star_model(star_mesh):
    return compute_coefficients(star_mesh, UniformDensity(rho=2000.0), nmax=8, n_q=4)
