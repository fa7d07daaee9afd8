"""
Optimization problems: the design spaces a search can run in, constraints with
a linear violation measure, and the planted-target demo objective that stands in
for a flow solver.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import settings
from config.errors import ValidationError
from geometry.shape import (
    DiscreteShape,
    DisplacementField,
    bounding_extents,
    enclosed_volume,
    hull_particulars,
    roughness,
    section_area,
    submerged_part,
    weighted_inner_product,
)
from parameterization.core import Parameterization, apply
from parameterization.spec import DesignVector
from pme.embedding import (
    Embedding,
    bound_violation,
    project_design_space,
    reconstruct_geometry,
    reconstruct_u,
)

logger = logging.getLogger(__name__)

ORIGINAL = "original"
KLE = "kle"
PME = "pme"
SPACES = (ORIGINAL, KLE, PME)


class OriginalSpace:
    """Search directly over the M design variables."""
    name = ORIGINAL

    def __init__(self, param: Parameterization):
        self.param = param
        self.lower = param.spec.lower
        self.upper = param.spec.upper

    @property
    def dimension(self) -> int:
        return self.param.M

    def design(self, point) -> DesignVector:
        return DesignVector(point, self.lower, self.upper)

    def shape(self, point) -> DiscreteShape:
        return self.param.shape(point)


class ReducedSpace:
    """
    Search over latent coordinates in [x_lower, x_upper].

    Shapes come from the geometric reconstruction <delta> + Z x; the design
    vector u_hat = <u> + V x is carried along for bound checks. KLE and PME
    searches share this class and differ only in whether the bound penalty
    is applied.
    """

    def __init__(self, emb: Embedding, baseline: DiscreteShape, name: str = PME):
        if name not in (KLE, PME):
            raise ValidationError(f"reduced space must be '{KLE}' or '{PME}', got {name}")
        self.name = name
        self.emb = emb
        self.baseline = baseline
        self.lower = emb.x_lower
        self.upper = emb.x_upper

    @property
    def dimension(self) -> int:
        return self.emb.N

    def design(self, point) -> DesignVector:
        return reconstruct_u(self.emb, point)

    def shape(self, point) -> DiscreteShape:
        return apply(self.baseline, reconstruct_geometry(self.emb, point))


@dataclass(frozen=True)
class Constraint:
    """
    Inequality on a geometric quantity: evaluator(shape) <comparison> threshold.

    The violation is the relative distance to the threshold, zero when satisfied.
    """
    name: str
    evaluator: Callable[[DiscreteShape], float] = field(repr=False)
    comparison: str
    threshold: float

    def __post_init__(self):
        if self.comparison not in (">=", "<="):
            raise ValidationError(f"comparison must be '>=' or '<=', got {self.comparison}")

    def violation(self, value: float) -> float:
        scale = abs(self.threshold) or 1.0
        if self.comparison == ">=":
            return max(self.threshold - value, 0.0) / scale
        return max(value - self.threshold, 0.0) / scale


def constraint_violation(constraints: Sequence[Constraint], shape: DiscreteShape) -> Tuple[Dict[str, float], float]:
    """Constraint values by name and the summed violation."""
    values = {c.name: float(c.evaluator(shape)) for c in constraints}
    total = sum(c.violation(values[c.name]) for c in constraints)
    return values, float(total)


def _volume(shape: DiscreteShape) -> float:
    if shape.topology[0] == 2:
        return section_area(shape)
    if shape.waterline is not None:
        shape = submerged_part(shape)
    return enclosed_volume(shape)


def _main_dimensions(shape: DiscreteShape) -> Tuple[float, float]:
    """Beam and draught of a hull, or chord and thickness of a section."""
    if shape.topology[0] == 2:
        chord, thickness, _ = bounding_extents(shape)
        return chord, thickness
    _, beam, draught = hull_particulars(shape) if shape.mirrored else bounding_extents(shape)
    return beam, draught


def demo_constraints(baseline: DiscreteShape, tolerance: float = 0.05) -> List[Constraint]:
    """
    Volume no smaller than the baseline's, main dimensions within +-5 %.

    For a two-row section the area stands in for the volume, and the chord and
    thickness for beam and draught.
    """
    volume = _volume(baseline)
    first, second = _main_dimensions(baseline)
    constraints = [Constraint("volume", _volume, ">=", volume)]
    labels = ("chord", "thickness") if baseline.topology[0] == 2 else ("beam", "draught")
    for index, (label, reference) in enumerate(zip(labels, (first, second))):
        if reference <= 0:
            continue
        constraints.append(Constraint(
            f"delta_{label}",
            lambda s, i=index, r=reference: abs(_main_dimensions(s)[i] - r),
            "<=",
            tolerance * reference,
        ))
    return constraints


class DemoProblem:
    """
    Planted-target objective:

        f(g') = ||g' - g*||^2 / ||g* - g0||^2 + w_r * roughness(g') / roughness(g0)

    with norms in the weighted geometric inner product of the baseline g0.
    """

    def __init__(self, baseline: DiscreteShape, target: DiscreteShape,
                 roughness_weight: float = settings.ROUGHNESS_WEIGHT,
                 constraints: Optional[List[Constraint]] = None,
                 target_u: Optional[np.ndarray] = None):
        self.baseline = baseline
        self.target = target
        self.target_u = None if target_u is None else np.asarray(target_u, dtype=float)
        self.roughness_weight = float(roughness_weight)
        self.scale = self._distance(baseline)
        if not self.scale > 0:
            raise ValidationError("target coincides with the baseline")
        self.baseline_roughness = roughness(baseline) or 1.0
        self.constraints = demo_constraints(baseline) if constraints is None else constraints

    def _distance(self, shape: DiscreteShape) -> float:
        diff = DisplacementField.from_nodal(shape.nodes - self.target.nodes)
        return weighted_inner_product(diff, diff, self.baseline)

    def objective(self, shape: DiscreteShape) -> float:
        return (self._distance(shape) / self.scale
                + self.roughness_weight * roughness(shape) / self.baseline_roughness)

    @property
    def floor(self) -> float:
        """Objective value at the target."""
        return self.objective(self.target)

    def constraint_values(self, shape: DiscreteShape) -> Dict[str, float]:
        values, _ = constraint_violation(self.constraints, shape)
        return values

    def __call__(self, shape: DiscreteShape) -> float:
        return self.objective(shape)


def demo_objective(shape: DiscreteShape, problem: DemoProblem) -> float:
    return problem.objective(shape)


def _planted_candidates(emb: Embedding, baseline: DiscreteShape, fraction: float):
    """Latent points around the baseline's latent image, largest offsets first."""
    origin = project_design_space(emb, -emb.mean_delta, baseline).values
    half = 0.5 * (emb.x_upper - emb.x_lower)
    for scale in (1.0, 0.5, 0.25, 0.125):
        step = scale * fraction * half
        yield origin + step
        yield origin - step
        for k in range(emb.N):
            for sign in (1.0, -1.0):
                x = origin.copy()
                x[k] += sign * step[k]
                yield x


def make_planted_problem(param: Parameterization, emb: Embedding, fraction: float = 0.1,
                         roughness_weight: float = settings.ROUGHNESS_WEIGHT) -> Tuple[DemoProblem, np.ndarray]:
    """
    Plant the target at u* = <u> + V x* for x* a small offset from the
    baseline's latent coordinates.

    Offsets are `fraction` of the latent half-widths, halved up to three times.
    Candidates are tried in a fixed order until x* lies in the latent box, u*
    lies in the original box and the target shape satisfies the demo
    constraints; the target is then reachable in all three spaces.

    Returns:
        (problem, x*)
    """
    baseline = param.baseline
    constraints = demo_constraints(baseline)
    for x_star in _planted_candidates(emb, baseline, fraction):
        if np.any(x_star < emb.x_lower) or np.any(x_star > emb.x_upper):
            continue
        u_star = reconstruct_u(emb, x_star)
        if not u_star.is_feasible():
            continue
        target = param.shape(u_star)
        _, violation = constraint_violation(constraints, target)
        if violation > 0 or np.allclose(target.nodes, baseline.nodes):
            continue
        logger.info(f"Planted target at x* = {np.round(x_star, 6)}")
        problem = DemoProblem(baseline, target, roughness_weight, constraints, u_star.values)
        return problem, x_star
    raise ValidationError("no feasible planted target among the candidates")


@dataclass
class Evaluation:
    """Outcome of one objective evaluation."""
    objective: float
    bound_violation: float
    constraint_violation: float
    penalized: float
    u_hat: Optional[np.ndarray]
    bounds_feasible: bool
    constraints_feasible: bool

    @property
    def feasible(self) -> bool:
        return self.bounds_feasible and self.constraints_feasible


@dataclass
class OptimizationProblem:
    """
    Objective and constraints over one design space.

    Attributes:
        space: OriginalSpace or ReducedSpace
        objective: shape -> float
        constraints: penalized with the same linear form as the bound violation
        budget: maximum number of objective evaluations
        penalty_c: penalty coefficient c
        use_penalty: add c * bound violation of u_hat
    """
    space: object
    objective: Callable[[DiscreteShape], float]
    constraints: List[Constraint] = field(default_factory=list)
    budget: int = 500
    penalty_c: float = settings.PENALTY_C
    use_penalty: bool = True

    def __post_init__(self):
        if self.penalty_c <= 0:
            raise ValidationError(f"penalty_c must be positive, got {self.penalty_c}")
        if self.budget < 1:
            raise ValidationError(f"budget must be positive, got {self.budget}")

    @property
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.space.lower, dtype=float), np.asarray(self.space.upper, dtype=float)

    def evaluate(self, point) -> Evaluation:
        """Objective, violations and penalized value; failures score +inf."""
        point = np.asarray(point, dtype=float)
        u_hat = self.space.design(point)
        violation = bound_violation(u_hat)
        try:
            shape = self.space.shape(point)
            f = float(self.objective(shape))
            _, c_violation = constraint_violation(self.constraints, shape)
        except Exception as e:
            logger.warning(f"Objective failed at {np.round(point, 6)}: {e}; scored +inf")
            f, c_violation = float("inf"), 0.0
        if not np.isfinite(f):
            f = float("inf")
        penalty = self.penalty_c * c_violation
        if self.use_penalty:
            penalty += penalized_objective(0.0, u_hat, self.penalty_c)
        return Evaluation(
            objective=f,
            bound_violation=violation,
            constraint_violation=c_violation,
            penalized=f + penalty,
            u_hat=np.array(u_hat.values),
            bounds_feasible=violation == 0.0,
            constraints_feasible=c_violation == 0.0,
        )


def penalized_objective(f_value: float, u_hat: DesignVector, c: float = settings.PENALTY_C) -> float:
    """f + c * bound_violation(u_hat) when u_hat leaves its box, f otherwise."""
    if c <= 0:
        raise ValidationError(f"penalty coefficient must be positive, got {c}")
    violation = bound_violation(u_hat)
    if violation > 0:
        return f_value + c * violation
    return f_value
