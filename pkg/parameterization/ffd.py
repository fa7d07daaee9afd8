"""
Trivariate Bernstein free-form deformation on an axis-aligned lattice.

Design-variable bounds are expressed on the lattice normalized to the unit cube,
so a DV value u moves its node by u times the box span along the DoF axis.
"""
import logging

import numpy as np

from config.errors import RegistrationError, ValidationError
from geometry.shape import DiscreteShape
from parameterization.bernstein import bernstein_matrix
from parameterization.spec import FFD_LATTICE, ActiveDof, ParameterizationSpec

logger = logging.getLogger(__name__)

LATTICE = (9, 3, 3)

# (i, j, k, dof, lower, upper), 1-based lattice layers
DESIGN_TABLE = (
    (1, 2, 1, 2, -0.500, 0.500),
    (2, 2, 1, 2, -0.500, 0.500),
    (3, 2, 1, 2, -0.500, 0.500),
    (4, 2, 1, 2, -0.500, 0.500),
    (5, 2, 1, 2, -0.500, 0.500),
    (6, 2, 1, 2, -0.500, 0.500),
    (7, 2, 1, 2, -0.500, 0.500),
    (8, 2, 1, 2, -0.500, 0.500),
    (9, 2, 1, 2, -0.500, 0.500),
    (1, 2, 2, 2, -0.500, 0.500),
    (2, 2, 2, 2, -0.500, 0.500),
    (3, 2, 2, 2, -0.500, 0.500),
    (4, 2, 2, 2, -0.500, 0.500),
    (5, 2, 2, 2, -0.500, 0.500),
    (6, 2, 2, 2, -0.500, 0.500),
    (7, 2, 2, 2, -0.500, 0.500),
    (8, 2, 2, 2, -0.500, 0.500),
    (9, 2, 2, 2, -0.500, 0.500),
    (9, 1, 2, 3, -0.250, 0.250),
    (9, 1, 1, 1, -0.025, 0.025),
    (9, 1, 1, 3, -0.100, 0.100),
    (8, 1, 1, 1, -0.025, 0.025),
)

BOX_TOLERANCE = 1e-9


def make_ffd_hull(baseline: DiscreteShape, lattice=LATTICE, box=None, active_table=DESIGN_TABLE):
    """
    FFD spec whose lattice box fits the baseline's bounding box unless ``box``
    (lower, upper) is given. Registration against the baseline is checked here.
    """
    if box is None:
        lower = baseline.nodes.min(axis=0)
        upper = baseline.nodes.max(axis=0)
    else:
        lower, upper = (np.asarray(c, dtype=float) for c in box)
    spec = ParameterizationSpec(
        kind=FFD_LATTICE,
        active=tuple(ActiveDof(*row) for row in active_table),
        lattice=tuple(int(v) for v in lattice),
        box_lower=tuple(float(v) for v in lower),
        box_upper=tuple(float(v) for v in upper),
    )
    local_coordinates(spec, baseline)
    logger.info(f"FFD lattice {spec.lattice}: M = {spec.M}")
    return spec


def local_coordinates(spec: ParameterizationSpec, baseline: DiscreteShape) -> np.ndarray:
    """Affine map of every node into the unit cube of the lattice box."""
    lower = np.asarray(spec.box_lower, dtype=float)
    span = np.asarray(spec.box_upper, dtype=float) - lower
    if np.any(span <= 0):
        raise ValidationError(f"degenerate FFD box span {span}")
    stu = (baseline.nodes - lower) / span
    outside = np.nonzero(np.any((stu < -BOX_TOLERANCE) | (stu > 1.0 + BOX_TOLERANCE), axis=1))[0]
    if outside.size:
        logger.error(f"{outside.size} nodes outside the FFD box")
        raise RegistrationError(
            f"{outside.size} nodes outside the FFD lattice box: {outside[:10].tolist()}",
            offenders=outside.tolist(),
        )
    return np.clip(stu, 0.0, 1.0)


def _bases(spec, stu):
    n1, n2, n3 = spec.lattice
    return (bernstein_matrix(n1 - 1, stu[:, 0]),
            bernstein_matrix(n2 - 1, stu[:, 1]),
            bernstein_matrix(n3 - 1, stu[:, 2]))


def ffd_displacement(spec: ParameterizationSpec, stu: np.ndarray, lattice_displacements) -> np.ndarray:
    """
    Node displacements (L, 3) produced by moving every lattice node.

    Args:
        stu: (L, 3) local coordinates
        lattice_displacements: (n1, n2, n3, 3) physical displacement of each lattice node
    """
    bs, bt, bv = _bases(spec, stu)
    return np.einsum("li,lj,lk,ijkd->ld", bs, bt, bv, np.asarray(lattice_displacements, dtype=float))


def ffd_operator(spec: ParameterizationSpec, baseline: DiscreteShape) -> np.ndarray:
    """Linear map (3L x M) from design variables to node displacements."""
    stu = local_coordinates(spec, baseline)
    bs, bt, bv = _bases(spec, stu)
    span = np.asarray(spec.box_upper, dtype=float) - np.asarray(spec.box_lower, dtype=float)
    L = baseline.size
    operator = np.zeros((3 * L, spec.M))
    for col, row in enumerate(spec.active):
        weight = bs[:, row.i - 1] * bt[:, row.j - 1] * bv[:, row.k - 1]
        axis = row.dof - 1
        operator[axis * L:(axis + 1) * L, col] = span[axis] * weight
    return operator
