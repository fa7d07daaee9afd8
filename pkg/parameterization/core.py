"""
Uniform deform/apply interface over both parameterizations.

Both maps are linear in u, so registration assembles the 3L x M operator once
and every deformation is a single product.
"""
import logging
from dataclasses import dataclass

import numpy as np

from config.errors import DimensionError
from geometry.shape import DiscreteShape, DisplacementField, check_conformance
from parameterization.bezier import bezier_operator
from parameterization.ffd import ffd_operator, local_coordinates
from parameterization.spec import BEZIER_AIRFOIL, DesignVector, ParameterizationSpec

logger = logging.getLogger(__name__)


def _as_values(u, M):
    values = u.values if isinstance(u, DesignVector) else np.asarray(u, dtype=float).reshape(-1)
    if values.size != M:
        raise DimensionError(f"design vector of length {values.size}, spec has M = {M}")
    return values


@dataclass(frozen=True)
class Parameterization:
    """A spec registered on its baseline shape."""
    spec: ParameterizationSpec
    baseline: DiscreteShape
    operator: np.ndarray

    @property
    def M(self) -> int:
        return self.spec.M

    def deform(self, u) -> DisplacementField:
        return DisplacementField(self.operator @ _as_values(u, self.M))

    def shape(self, u) -> DiscreteShape:
        return apply(self.baseline, self.deform(u))


def register(spec: ParameterizationSpec, baseline: DiscreteShape) -> Parameterization:
    if spec.kind == BEZIER_AIRFOIL:
        operator = bezier_operator(spec, baseline)
    else:
        local_coordinates(spec, baseline)
        operator = ffd_operator(spec, baseline)
    operator.setflags(write=False)
    logger.debug(f"Registered {spec.kind} on {baseline.size} nodes")
    return Parameterization(spec, baseline, operator)


def deform(spec: ParameterizationSpec, baseline: DiscreteShape, u) -> DisplacementField:
    return register(spec, baseline).deform(u)


def apply(baseline: DiscreteShape, d) -> DiscreteShape:
    """g' = g + delta; measures and weights are carried over."""
    values = check_conformance(d, baseline)
    return baseline.with_nodes(baseline.nodes + values.reshape(3, -1).T)
