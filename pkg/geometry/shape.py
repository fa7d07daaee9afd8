"""
Discretized shapes, displacement fields and the weighted geometric inner product.

A DiscreteShape stores L nodes on a structured rows x cols grid together with the
element measure and weight of every node. Displacement fields are flat vectors
laid out in component blocks: all xi1 values, then all xi2, then all xi3.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from config.errors import DimensionError, TopologyError, ValidationError

logger = logging.getLogger(__name__)


def _frozen(array, dtype=float):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DiscreteShape:
    """
    Discretized parent geometry.

    Attributes:
        nodes (np.ndarray): (L, 3) node coordinates; 2D shapes carry a zero xi3 column
        measures (np.ndarray): (L,) element measures, >= 0
        weights (np.ndarray): (L,) node weights, >= 0
        topology (tuple): structured grid dimensions (rows, cols), rows * cols == L
        mirrored (bool): surface is a demi-geometry closed by the xi2 = 0 plane
        waterline (float, optional): xi3 level separating weighted from unweighted nodes
    """
    nodes: np.ndarray
    measures: np.ndarray
    weights: np.ndarray
    topology: Tuple[int, int]
    mirrored: bool = False
    waterline: Optional[float] = None

    def __post_init__(self):
        nodes = _frozen(self.nodes)
        if nodes.ndim != 2 or nodes.shape[1] != 3:
            raise DimensionError(f"nodes must have shape (L, 3), got {nodes.shape}")
        size = nodes.shape[0]
        measures = _frozen(self.measures).reshape(-1)
        weights = _frozen(self.weights).reshape(-1)
        if measures.size != size or weights.size != size:
            raise DimensionError(
                f"expected {size} measures and weights, got {measures.size} and {weights.size}"
            )
        rows, cols = (int(v) for v in self.topology)
        if rows * cols != size:
            raise TopologyError(f"topology {rows}x{cols} does not match {size} nodes")
        if np.any(measures < 0) or np.any(weights < 0):
            raise ValidationError("measures and weights must be non-negative")
        if not np.any(measures * weights > 0):
            raise ValidationError("at least one node must have a positive measure * weight")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "measures", measures)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "topology", (rows, cols))

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def gw(self) -> np.ndarray:
        """Per-node product measure * weight."""
        return self.measures * self.weights

    @property
    def gw_diagonal(self) -> np.ndarray:
        """Diagonal of G W over the 3L component-block layout."""
        return np.tile(self.gw, 3)

    def grid(self) -> np.ndarray:
        rows, cols = self.topology
        return self.nodes.reshape(rows, cols, 3)

    def with_nodes(self, nodes) -> "DiscreteShape":
        return DiscreteShape(nodes, self.measures, self.weights, self.topology,
                             self.mirrored, self.waterline)

    def with_weights(self, weights) -> "DiscreteShape":
        return DiscreteShape(self.nodes, self.measures, weights, self.topology,
                             self.mirrored, self.waterline)

    def with_measures(self, measures) -> "DiscreteShape":
        return DiscreteShape(self.nodes, measures, self.weights, self.topology,
                             self.mirrored, self.waterline)


@dataclass(frozen=True)
class DisplacementField:
    """Shape modification vector in component-block layout (length 3L)."""
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = _frozen(self.values).reshape(-1)
        if values.size % 3:
            raise DimensionError(f"field length {values.size} is not a multiple of 3")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, size: int) -> "DisplacementField":
        return cls(np.zeros(3 * size))

    @classmethod
    def from_nodal(cls, nodal) -> "DisplacementField":
        """Build from an (L, 3) array of per-node vectors."""
        return cls(np.asarray(nodal, dtype=float).T.reshape(-1))

    @property
    def size(self) -> int:
        return self.values.size // 3

    def nodal(self) -> np.ndarray:
        """Per-node vectors as an (L, 3) array."""
        return self.values.reshape(3, -1).T

    def __add__(self, other):
        return DisplacementField(self.values + _values(other))

    def __sub__(self, other):
        return DisplacementField(self.values - _values(other))

    def __neg__(self):
        return DisplacementField(-self.values)

    def __mul__(self, scalar):
        return DisplacementField(self.values * float(scalar))

    __rmul__ = __mul__


FieldLike = Union[DisplacementField, np.ndarray]


def _values(a: FieldLike) -> np.ndarray:
    if isinstance(a, DisplacementField):
        return a.values
    return np.asarray(a, dtype=float).reshape(-1)


def check_conformance(a: FieldLike, shape: DiscreteShape) -> np.ndarray:
    values = _values(a)
    if values.size != 3 * shape.size:
        raise DimensionError(
            f"field of length {values.size} does not conform to a shape with {shape.size} nodes"
        )
    return values


def weighted_inner_product(a: FieldLike, b: FieldLike, shape: DiscreteShape) -> float:
    """Sum over nodes of rho_i * dG_i * (a_i . b_i)."""
    av = check_conformance(a, shape).reshape(3, -1)
    bv = check_conformance(b, shape).reshape(3, -1)
    return float(np.dot(shape.gw, np.einsum("ki,ki->i", av, bv)))


def field_norm(a: FieldLike, shape: DiscreteShape) -> float:
    return float(np.sqrt(max(weighted_inner_product(a, a, shape), 0.0)))


def _triangles(shape: DiscreteShape):
    rows, cols = shape.topology
    if rows < 2 or cols < 2:
        raise TopologyError(f"a {rows}x{cols} grid has no panels")
    g = shape.grid()
    a, b = g[:-1, :-1], g[:-1, 1:]
    c, d = g[1:, 1:], g[1:, :-1]
    # every quad is split along its a-c diagonal
    first = (a.reshape(-1, 3), b.reshape(-1, 3), c.reshape(-1, 3))
    second = (a.reshape(-1, 3), c.reshape(-1, 3), d.reshape(-1, 3))
    return first, second


def enclosed_volume(shape: DiscreteShape, origin=(0.0, 0.0, 0.0)) -> float:
    """
    Volume enclosed by the panel surface, by signed tetrahedra about ``origin``.

    Open boundaries must lie on planes through ``origin``; for a mirrored
    demi-surface that is the xi2 = 0 plane and the result is the demi-volume.
    """
    o = np.asarray(origin, dtype=float)
    total = 0.0
    for p, q, r in _triangles(shape):
        p, q, r = p - o, q - o, r - o
        total += np.einsum("ij,ij->i", p, np.cross(q, r)).sum()
    return float(abs(total) / 6.0)


def bounding_extents(shape: DiscreteShape) -> Tuple[float, float, float]:
    """Axis-aligned extents (max - min) along xi1, xi2, xi3."""
    if shape.size == 0:
        raise ValidationError("empty shape")
    span = np.ptp(shape.nodes, axis=0)
    return float(span[0]), float(span[1]), float(span[2])


def hull_particulars(shape: DiscreteShape) -> Tuple[float, float, float]:
    """
    Length, beam and draught of the wetted (weighted) part of a hull surface.

    Beam of a mirrored demi-hull is twice the largest half-breadth; draught is
    measured from the keel up to the waterline when one is set.
    """
    wet = shape.nodes[shape.weights > 0]
    length = float(np.ptp(wet[:, 0]))
    beam = float(2.0 * np.max(wet[:, 1])) if shape.mirrored else float(np.ptp(wet[:, 1]))
    top = shape.waterline if shape.waterline is not None else float(np.max(wet[:, 2]))
    draught = float(top - np.min(wet[:, 2]))
    return length, beam, draught


def submerged_part(shape: DiscreteShape) -> DiscreteShape:
    """Largest sub-grid whose nodes all carry a positive weight."""
    rows, cols = shape.topology
    mask = (shape.weights > 0).reshape(rows, cols)
    keep_cols = mask.all(axis=0)
    if keep_cols.any():
        keep_rows = mask[:, keep_cols].all(axis=1)
    else:
        keep_rows = mask.all(axis=1)
        keep_cols = mask[keep_rows].all(axis=0)
    if keep_rows.sum() < 2 or keep_cols.sum() < 2:
        raise TopologyError("weighted nodes do not form a panel sub-grid")
    idx = np.arange(shape.size).reshape(rows, cols)[np.ix_(keep_rows, keep_cols)]
    sub = idx.reshape(-1)
    return DiscreteShape(shape.nodes[sub], shape.measures[sub], shape.weights[sub],
                         idx.shape, shape.mirrored, shape.waterline)


def section_area(shape: DiscreteShape) -> float:
    """
    Area enclosed in the xi1-xi2 plane by a two-row section (upper row and lower
    row both running from leading to trailing edge).
    """
    rows, cols = shape.topology
    if rows != 2 or cols < 2:
        raise TopologyError(f"section area needs a 2-row curve grid, got {rows}x{cols}")
    g = shape.grid()
    loop = np.vstack([g[0, :, :2], g[1, ::-1, :2]])
    x, y = loop[:, 0], loop[:, 1]
    return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def roughness(shape: DiscreteShape) -> float:
    """Sum of squared second differences of node positions along grid lines."""
    g = shape.grid()
    total = 0.0
    if g.shape[1] >= 3:
        total += float(np.sum(np.diff(g, n=2, axis=1) ** 2))
    if g.shape[0] >= 3:
        total += float(np.sum(np.diff(g, n=2, axis=0) ** 2))
    return total


def element_measures(nodes, topology, mode: str = "panel") -> np.ndarray:
    """
    Per-node element measures.

    Modes:
        panel   -- quarter of the area of every quad touching the node
        arc     -- half the length of every segment touching the node, per grid row
        uniform -- all ones
    """
    nodes = np.asarray(nodes, dtype=float)
    rows, cols = topology
    if mode == "uniform":
        return np.ones(rows * cols)
    g = nodes.reshape(rows, cols, 3)
    if mode == "arc":
        seg = np.linalg.norm(np.diff(g, axis=1), axis=2)
        out = np.zeros((rows, cols))
        out[:, :-1] += 0.5 * seg
        out[:, 1:] += 0.5 * seg
        return out.reshape(-1)
    if mode == "panel":
        if rows < 2 or cols < 2:
            raise TopologyError(f"a {rows}x{cols} grid has no panels")
        a, b = g[:-1, :-1], g[:-1, 1:]
        c, d = g[1:, 1:], g[1:, :-1]
        area = 0.5 * (np.linalg.norm(np.cross(b - a, c - a), axis=2)
                      + np.linalg.norm(np.cross(c - a, d - a), axis=2))
        out = np.zeros((rows, cols))
        out[:-1, :-1] += 0.25 * area
        out[:-1, 1:] += 0.25 * area
        out[1:, 1:] += 0.25 * area
        out[1:, :-1] += 0.25 * area
        return out.reshape(-1)
    raise ValidationError(f"unknown measure mode: {mode}")


def waterline_weights(nodes, waterline: float, tolerance: float = 1e-12) -> np.ndarray:
    """rho = 1 for nodes at or below the waterline, 0 above."""
    z = np.asarray(nodes, dtype=float)[:, 2]
    return (z <= waterline + tolerance).astype(float)
