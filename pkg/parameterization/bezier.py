"""
Two-curve Bezier airfoil: suction and pressure sides are degree-10 Bezier curves
fitted to the NACA 0012 thickness law; interior control ordinates are perturbed
multiplicatively, y' = y * (1 + u).
"""
import logging

import numpy as np

from config.errors import FitError, ValidationError
from geometry.shape import DiscreteShape, element_measures
from parameterization.bernstein import bernstein_matrix
from parameterization.spec import BEZIER_AIRFOIL, ActiveDof, ParameterizationSpec

logger = logging.getLogger(__name__)

DEGREE = 10
# Control abscissae: x1 = x0 keeps a vertical tangent at the leading edge
CONTROL_X = (0.0, 0.0, 0.02, 0.07, 0.15, 0.27, 0.42, 0.58, 0.74, 0.88, 1.0)
ACTIVE_POINTS = (3, 4, 5, 6, 7, 8, 9)  # 1-based; points 1, 2, 10, 11 stay fixed
BOUND = 0.9
FIT_TOLERANCE = 1e-3
FIT_SAMPLES = 400


def naca4_thickness(x, thickness=0.12):
    """Half-thickness of a symmetric NACA 4-digit section with a closed trailing edge."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return 5.0 * thickness * (0.2969 * np.sqrt(x) - 0.1260 * x - 0.3516 * x ** 2
                              + 0.2843 * x ** 3 - 0.1036 * x ** 4)


def cosine_parameters(count):
    """Parameter values clustered at both curve ends."""
    return 0.5 * (1.0 - np.cos(np.pi * np.arange(count) / (count - 1)))


def fit_bezier_side(control_x=CONTROL_X, thickness=0.12, samples=FIT_SAMPLES,
                    tolerance=FIT_TOLERANCE):
    """
    Least-squares ordinates of a Bezier curve with fixed abscissae matching the
    NACA thickness law. End ordinates are clamped to zero.

    Returns:
        np.ndarray: control ordinates, one per control point

    Raises:
        FitError: if the largest residual exceeds ``tolerance``
    """
    cx = np.asarray(control_x, dtype=float)
    degree = cx.size - 1
    t = cosine_parameters(samples)
    basis = bernstein_matrix(degree, t)
    x = basis @ cx
    target = naca4_thickness(x, thickness)
    interior, *_ = np.linalg.lstsq(basis[:, 1:-1], target, rcond=None)
    cy = np.concatenate([[0.0], interior, [0.0]])
    residual = float(np.max(np.abs(basis @ cy - target)))
    if residual > tolerance:
        logger.error(f"Bezier fit residual {residual:.3e} above tolerance {tolerance:.1e}")
        raise FitError(f"Bezier fit residual {residual:.3e} exceeds {tolerance:.1e}")
    logger.debug(f"Bezier fit residual {residual:.3e}")
    return cy


def airfoil_nodes(control_x, control_y, nodes_per_side):
    """
    Node coordinates of both sides: row 0 is the suction side, row 1 the
    pressure side, both ordered from leading to trailing edge.
    """
    cx = np.asarray(control_x, dtype=float)
    cy = np.asarray(control_y, dtype=float)
    basis = bernstein_matrix(cx.size - 1, cosine_parameters(nodes_per_side))
    x = basis @ cx
    upper = np.column_stack([x, basis @ cy, np.zeros_like(x)])
    lower = np.column_stack([x, -(basis @ cy), np.zeros_like(x)])
    return np.vstack([upper, lower])


def make_bezier_airfoil(nodes_per_side=91, measure_mode="arc", thickness=0.12):
    """
    Build the 14-variable Bezier airfoil spec and its NACA 0012 baseline.

    Returns:
        tuple: (ParameterizationSpec, DiscreteShape)
    """
    if nodes_per_side < DEGREE + 2:
        raise ValidationError(f"need at least {DEGREE + 2} nodes per side, got {nodes_per_side}")
    cy = fit_bezier_side(CONTROL_X, thickness)
    active = tuple(
        ActiveDof(i=point, j=side, k=1, dof=2, lower=-BOUND, upper=BOUND)
        for side in (1, 2)
        for point in ACTIVE_POINTS
    )
    spec = ParameterizationSpec(
        kind=BEZIER_AIRFOIL,
        active=active,
        control_x=tuple(float(v) for v in CONTROL_X),
        control_y=tuple(float(v) for v in cy),
        nodes_per_side=int(nodes_per_side),
    )
    nodes = airfoil_nodes(CONTROL_X, cy, nodes_per_side)
    topology = (2, nodes_per_side)
    shape = DiscreteShape(nodes, element_measures(nodes, topology, measure_mode),
                          np.ones(len(nodes)), topology)
    logger.info(f"Bezier airfoil: {2 * nodes_per_side} nodes, M = {spec.M}")
    return spec, shape


def control_polygons(spec: ParameterizationSpec, u=None):
    """Suction and pressure control polygons, optionally perturbed by ``u``."""
    cx = np.asarray(spec.control_x, dtype=float)
    cy = np.asarray(spec.control_y, dtype=float)
    ys = [cy.copy(), -cy]
    if u is not None:
        for row, value in zip(spec.active, np.asarray(u, dtype=float)):
            ys[row.j - 1][row.i - 1] *= 1.0 + value
    return [np.column_stack([cx, y]) for y in ys]


def bezier_operator(spec: ParameterizationSpec, baseline: DiscreteShape) -> np.ndarray:
    """Linear map (3L x M) from design variables to node displacements."""
    n = spec.nodes_per_side
    if baseline.size != 2 * n:
        raise ValidationError(f"baseline has {baseline.size} nodes, spec expects {2 * n}")
    cy = np.asarray(spec.control_y, dtype=float)
    basis = bernstein_matrix(len(spec.control_x) - 1, cosine_parameters(n))
    L = baseline.size
    operator = np.zeros((3 * L, spec.M))
    for col, row in enumerate(spec.active):
        sign = 1.0 if row.j == 1 else -1.0
        start = L + (row.j - 1) * n
        operator[start:start + n, col] = sign * cy[row.i - 1] * basis[:, row.i - 1]
    return operator
