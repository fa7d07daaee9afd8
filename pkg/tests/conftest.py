import os
import sys

import numpy as np
import pytest

# Add project root to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from cli.presets import HULL, build_preset
from geometry.builders import make_demo_hull
from geometry.shape import DiscreteShape
from parameterization.bezier import make_bezier_airfoil
from parameterization.core import register
from parameterization.ffd import make_ffd_hull
from sampling.snapshots import assemble, from_raw, sample_designs


def line_shape(L, measures=None, weights=None):
    """L nodes on a single grid row with given (or unit) measures and weights."""
    rng = np.random.default_rng(L)
    nodes = rng.normal(size=(L, 3))
    measures = np.ones(L) if measures is None else measures
    weights = np.ones(L) if weights is None else weights
    return DiscreteShape(nodes, measures, weights, (1, L))


def linear_toy(L=3, M=2, S=20, seed=0, weights=None):
    """
    Linear parameterization delta = B u on a small shape.

    Returns:
        (shape, B, snapshots) with positive random measures
    """
    rng = np.random.default_rng(seed)
    measures = rng.uniform(0.5, 1.5, size=L)
    shape = line_shape(L, measures, weights)
    B = rng.normal(size=(3 * L, M))
    lower, upper = -np.ones(M), np.ones(M)
    raw_u = rng.uniform(lower[:, None], upper[:, None], size=(M, S))
    snapshots = from_raw(B @ raw_u, raw_u, lower, upper, seed=seed, tag="toy")
    return shape, B, snapshots


@pytest.fixture
def toy():
    return linear_toy()


@pytest.fixture(scope="session")
def airfoil():
    """Preset airfoil spec and baseline (91 nodes per side)."""
    return make_bezier_airfoil()


@pytest.fixture(scope="session")
def small_hull():
    baseline = make_demo_hull(stations=12, girth=7)
    return make_ffd_hull(baseline), baseline


@pytest.fixture(scope="session")
def airfoil_snapshots(airfoil):
    spec, baseline = airfoil
    return assemble(spec, baseline, sample_designs(spec, 1000, seed=7), seed=7)


@pytest.fixture(scope="session")
def hull():
    """Preset demi-hull (90 x 25 nodes) and its 22-variable FFD spec."""
    return build_preset(HULL)


@pytest.fixture(scope="session")
def hull_snapshots(hull):
    spec, baseline = hull
    return assemble(spec, baseline, sample_designs(spec, 1000, seed=7), seed=7)


@pytest.fixture(scope="session", params=["airfoil", "hull"])
def preset_case(request):
    """(spec, baseline, snapshots) of each preset at S = 1000."""
    spec, baseline = request.getfixturevalue(request.param)
    return spec, baseline, request.getfixturevalue(f"{request.param}_snapshots")


@pytest.fixture(scope="session")
def airfoil_param(airfoil):
    spec, baseline = airfoil
    return register(spec, baseline)
