"""
Design vectors and parameterization specs, with their JSON representation.
"""
import hashlib
import json
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from config.errors import ConfigError, DimensionError, ValidationError
from schemas.validator import validator

logger = logging.getLogger(__name__)

BEZIER_AIRFOIL = "bezier-airfoil"
FFD_LATTICE = "ffd-lattice"
KINDS = (BEZIER_AIRFOIL, FFD_LATTICE)
AXES = {1: "xi1", 2: "xi2", 3: "xi3"}


@dataclass(frozen=True)
class DesignVector:
    """Point of the original design space with its box bounds."""
    values: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        values, lower, upper = (np.array(a, dtype=float).reshape(-1)
                                for a in (self.values, self.lower, self.upper))
        if not values.size == lower.size == upper.size:
            raise DimensionError(
                f"values/lower/upper lengths differ: {values.size}, {lower.size}, {upper.size}"
            )
        if np.any(lower >= upper):
            raise ValidationError("lower bounds must be strictly below upper bounds")
        for a in (values, lower, upper):
            a.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def M(self) -> int:
        return self.values.size

    def is_feasible(self) -> bool:
        return bool(np.all(self.values >= self.lower) and np.all(self.values <= self.upper))

    def replace(self, values) -> "DesignVector":
        return DesignVector(values, self.lower, self.upper)


@dataclass(frozen=True)
class ActiveDof:
    """One design variable: a lattice node (or Bezier control point) moved along one axis.

    Indices are 1-based as in the FFD design-variable table. For Bezier specs
    ``i`` is the control point and ``j`` the side (1 suction, 2 pressure).
    """
    i: int
    j: int
    k: int
    dof: int
    lower: float
    upper: float


@dataclass(frozen=True)
class ParameterizationSpec:
    kind: str
    active: Tuple[ActiveDof, ...]
    # bezier-airfoil
    control_x: Optional[Tuple[float, ...]] = None
    control_y: Optional[Tuple[float, ...]] = None
    nodes_per_side: Optional[int] = None
    perturbation: str = "multiplicative"
    # ffd-lattice
    lattice: Optional[Tuple[int, int, int]] = None
    box_lower: Optional[Tuple[float, float, float]] = None
    box_upper: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown parameterization kind: {self.kind}")
        if not self.active:
            raise ConfigError("a parameterization needs at least one active DoF")
        if self.kind == BEZIER_AIRFOIL:
            n_ctrl = len(self.control_x or ())
            if n_ctrl < 2 or len(self.control_y or ()) != n_ctrl:
                raise ConfigError("Bezier spec needs matching control_x and control_y")
            for row in self.active:
                if not (1 <= row.i <= n_ctrl and row.j in (1, 2) and row.dof == 2):
                    raise ConfigError(f"invalid Bezier active entry: {row}")
        else:
            if self.lattice is None or self.box_lower is None or self.box_upper is None:
                raise ConfigError("FFD spec needs lattice dims and box corners")
            n1, n2, n3 = self.lattice
            for row in self.active:
                if not (1 <= row.i <= n1 and 1 <= row.j <= n2 and 1 <= row.k <= n3):
                    raise ConfigError(f"active node {row} outside a {n1}x{n2}x{n3} lattice")
                if row.dof not in AXES:
                    raise ConfigError(f"invalid DoF axis in {row}")
        for row in self.active:
            if not row.lower < row.upper:
                raise ConfigError(f"empty bounds in {row}")

    @property
    def M(self) -> int:
        return len(self.active)

    @property
    def lower(self) -> np.ndarray:
        return np.array([row.lower for row in self.active])

    @property
    def upper(self) -> np.ndarray:
        return np.array([row.upper for row in self.active])

    def design(self, values=None) -> DesignVector:
        """Design vector carrying the active-DoF bounds (zeros when ``values`` is None)."""
        values = np.zeros(self.M) if values is None else values
        return DesignVector(values, self.lower, self.upper)

    def to_dict(self) -> dict:
        data = {
            "kind": self.kind,
            "active": [
                {"i": r.i, "j": r.j, "k": r.k, "dof": r.dof, "lower": r.lower, "upper": r.upper}
                for r in self.active
            ],
        }
        if self.kind == BEZIER_AIRFOIL:
            data["bezier"] = {
                "control_x": list(self.control_x),
                "control_y": list(self.control_y),
                "nodes_per_side": self.nodes_per_side,
                "perturbation": self.perturbation,
            }
        else:
            data["ffd"] = {
                "lattice": list(self.lattice),
                "box_lower": list(self.box_lower),
                "box_upper": list(self.box_upper),
            }
        return data

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


def spec_from_dict(data: dict) -> ParameterizationSpec:
    error = validator.validate_parameterization_spec(data)
    if error:
        raise ConfigError(error)
    active = tuple(
        ActiveDof(int(r["i"]), int(r["j"]), int(r["k"]), int(r["dof"]),
                  float(r["lower"]), float(r["upper"]))
        for r in data["active"]
    )
    if data["kind"] == BEZIER_AIRFOIL:
        b = data["bezier"]
        return ParameterizationSpec(
            kind=BEZIER_AIRFOIL,
            active=active,
            control_x=tuple(float(v) for v in b["control_x"]),
            control_y=tuple(float(v) for v in b["control_y"]),
            nodes_per_side=int(b["nodes_per_side"]),
            perturbation=b.get("perturbation", "multiplicative"),
        )
    f = data["ffd"]
    return ParameterizationSpec(
        kind=FFD_LATTICE,
        active=active,
        lattice=tuple(int(v) for v in f["lattice"]),
        box_lower=tuple(float(v) for v in f["box_lower"]),
        box_upper=tuple(float(v) for v in f["box_upper"]),
    )


def save_spec(spec: ParameterizationSpec, path: str) -> None:
    with open(path, "w", newline="\n") as f:
        json.dump(spec.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


def load_spec(path: str) -> ParameterizationSpec:
    with open(path, "r") as f:
        return spec_from_dict(json.load(f))
