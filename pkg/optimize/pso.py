"""
Deterministic particle swarm optimizer with an optional pattern-search polish.

No random coefficients are drawn: the swarm starts on an unscrambled Halton
sequence over the box (shifted by the seed) with zero velocities, and updates
are synchronous. Identical (seed, config, problem) give identical traces.
"""
import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.stats import qmc

from config import settings
from config.errors import ArchiveError, ValidationError
from optimize.problems import Evaluation, OptimizationProblem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PSOConfig:
    swarm_size: Optional[int] = None
    inertia: float = settings.PSO_INERTIA
    cognitive: float = settings.PSO_COGNITIVE
    social: float = settings.PSO_SOCIAL
    polish: bool = False
    polish_every: int = settings.POLISH_EVERY
    polish_step: float = 0.1
    workers: int = 1

    def swarm_for(self, dimension: int) -> int:
        if self.swarm_size is not None:
            return int(self.swarm_size)
        return min(settings.PSO_SWARM_FACTOR * int(math.ceil(dimension)), settings.PSO_SWARM_CAP)

    @classmethod
    def from_dict(cls, data: dict) -> "PSOConfig":
        keys = ("swarm_size", "inertia", "cognitive", "social", "polish", "polish_every", "polish_step")
        return cls(**{k: data[k] for k in keys if k in data})


@dataclass
class TraceRecord:
    evaluation: int
    iteration: int
    point: np.ndarray
    u_hat: Optional[np.ndarray]
    objective: float
    penalty: float
    penalized: float
    bounds_feasible: bool
    constraints_feasible: bool
    best: float
    incumbent_feasible: bool


@dataclass
class OptimizationTrace:
    """Per-evaluation history of one run."""
    space: str
    records: List[TraceRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    @property
    def best_record(self) -> TraceRecord:
        return min(self.records, key=lambda r: (r.penalized, r.evaluation))

    def incumbents(self) -> List[TraceRecord]:
        """Records that improved the running best."""
        out, best = [], float("inf")
        for r in self.records:
            if r.penalized < best:
                out.append(r)
                best = r.penalized
        return out

    def best_history(self) -> np.ndarray:
        return np.array([r.best for r in self.records])

    def write_csv(self, path: str) -> None:
        """One row per evaluation; point and u_hat components in separate columns."""
        if not self.records:
            raise ValidationError("empty trace")
        dim = self.records[0].point.size
        m = 0 if self.records[0].u_hat is None else self.records[0].u_hat.size
        header = (["evaluation", "iteration"] + [f"x{k + 1}" for k in range(dim)]
                  + [f"u{k + 1}" for k in range(m)]
                  + ["objective", "penalty", "penalized", "bounds_feasible",
                     "constraints_feasible", "best", "incumbent_feasible"])
        fmt = lambda v: settings.FLOAT_FORMAT % v
        try:
            with open(path, "w", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(header)
                for r in self.records:
                    u = [] if r.u_hat is None else [fmt(v) for v in r.u_hat]
                    writer.writerow([r.evaluation, r.iteration] + [fmt(v) for v in r.point] + u
                                    + [fmt(r.objective), fmt(r.penalty), fmt(r.penalized),
                                       int(r.bounds_feasible), int(r.constraints_feasible),
                                       fmt(r.best), int(r.incumbent_feasible)])
        except OSError as e:
            logger.error(f"Could not write trace {path}: {e}")
            raise ArchiveError(f"could not write trace {path}: {e}") from e


class SwarmOptimizer:
    """Runs one deterministic PSO search and records every evaluation."""

    def __init__(self, problem: OptimizationProblem, lower: np.ndarray, upper: np.ndarray,
                 config: PSOConfig):
        self.logger = logging.getLogger(self.__class__.__name__)
        self.problem = problem
        self.lower = lower
        self.upper = upper
        self.config = config
        self.trace = OptimizationTrace(getattr(problem.space, "name", "original"))
        self.best_value = float("inf")
        self.best_point = lower.copy()
        self.best_feasible = False

    @property
    def remaining(self) -> int:
        return self.problem.budget - len(self.trace)

    def _record(self, point: np.ndarray, result: Evaluation, iteration: int) -> float:
        if result.penalized < self.best_value:
            self.best_value = result.penalized
            self.best_point = point.copy()
            self.best_feasible = result.feasible
        self.trace.records.append(TraceRecord(
            evaluation=len(self.trace) + 1,
            iteration=iteration,
            point=point.copy(),
            u_hat=result.u_hat,
            objective=result.objective,
            penalty=result.penalized - result.objective if math.isfinite(result.objective) else 0.0,
            penalized=result.penalized,
            bounds_feasible=result.bounds_feasible,
            constraints_feasible=result.constraints_feasible,
            best=self.best_value,
            incumbent_feasible=self.best_feasible,
        ))
        return result.penalized

    def evaluate_batch(self, points: np.ndarray, iteration: int) -> np.ndarray:
        """Evaluate up to the remaining budget; records are appended in particle order."""
        count = min(len(points), self.remaining)
        points = points[:count]
        if self.config.workers > 1 and count > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                results = list(pool.map(self.problem.evaluate, points))
        else:
            results = [self.problem.evaluate(p) for p in points]
        return np.array([self._record(p, r, iteration) for p, r in zip(points, results)])

    def clamp(self, positions: np.ndarray, velocities: np.ndarray) -> None:
        low = positions < self.lower
        high = positions > self.upper
        np.clip(positions, self.lower, self.upper, out=positions)
        velocities[low | high] = 0.0

    def _sweep(self, step: np.ndarray, iteration: int) -> bool:
        improved = False
        for k in range(self.lower.size):
            for direction in (1.0, -1.0):
                if self.remaining <= 0:
                    return improved
                trial = self.best_point.copy()
                trial[k] = np.clip(trial[k] + direction * step[k], self.lower[k], self.upper[k])
                if trial[k] == self.best_point[k]:
                    continue
                before = self.best_value
                self.evaluate_batch(trial[None, :], iteration)
                if self.best_value < before:
                    improved = True
                    break
        return improved

    def polish(self, step: np.ndarray, iteration: int) -> Tuple[np.ndarray, bool]:
        """
        Coordinate pattern search around the incumbent.

        Sweeps repeat at the current step while they improve; the first sweep
        without improvement halves the step and ends the polish.
        """
        improved = False
        while self.remaining > 0:
            if not self._sweep(step, iteration):
                step = 0.5 * step
                break
            improved = True
        return step, improved

    def run(self, seed: int) -> Tuple[np.ndarray, OptimizationTrace]:
        cfg = self.config
        dim = self.lower.size
        swarm = cfg.swarm_for(dim)
        if self.problem.budget < swarm:
            raise ValidationError(f"budget {self.problem.budget} is smaller than the swarm ({swarm})")

        halton = qmc.Halton(d=dim, scramble=False)
        if seed:
            halton.fast_forward(int(seed))
        positions = self.lower + halton.random(swarm) * (self.upper - self.lower)
        velocities = np.zeros_like(positions)

        values = self.evaluate_batch(positions, 0)
        personal = positions.copy()
        personal_values = values.copy()
        step = cfg.polish_step * (self.upper - self.lower)
        iteration = 0
        while self.remaining > 0:
            iteration += 1
            leader = personal[np.argmin(personal_values)] if np.isfinite(personal_values).any() else self.best_point
            velocities = (cfg.inertia * velocities
                          + cfg.cognitive * (personal - positions)
                          + cfg.social * (leader - positions))
            positions = positions + velocities
            self.clamp(positions, velocities)
            values = self.evaluate_batch(positions, iteration)
            count = values.size
            better = values < personal_values[:count]
            personal[:count][better] = positions[:count][better]
            personal_values[:count][better] = values[better]

            if cfg.polish and iteration % cfg.polish_every == 0 and self.remaining > 0:
                step, improved = self.polish(step, iteration)
                if improved:
                    owner = int(np.argmin(personal_values))
                    personal[owner] = self.best_point
                    personal_values[owner] = self.best_value
            self.logger.debug(f"[{self.trace.space}] iteration {iteration}: best {self.best_value:.6g}")

        self.logger.info(f"[{self.trace.space}] {len(self.trace)} evaluations, "
                         f"best {self.best_value:.6g}, incumbent feasible: {self.best_feasible}")
        return self.best_point.copy(), self.trace


def pso_minimize(problem: OptimizationProblem, bounds: Optional[Tuple[np.ndarray, np.ndarray]] = None,
                 seed: int = 0, config: Optional[PSOConfig] = None) -> Tuple[np.ndarray, OptimizationTrace]:
    """
    Minimize the penalized objective of a problem inside a box.

    Args:
        problem: objective, constraints, budget and penalty settings
        bounds: (lower, upper) in the active space; defaults to the space's box
        seed: Halton offset of the initial swarm
        config: PSO coefficients, swarm size and polish settings

    Returns:
        (best point, trace)
    """
    lower, upper = problem.bounds if bounds is None else bounds
    lower = np.asarray(lower, dtype=float).reshape(-1)
    upper = np.asarray(upper, dtype=float).reshape(-1)
    if lower.size != upper.size or lower.size == 0:
        raise ValidationError("bounds must be two non-empty vectors of equal length")
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise ValidationError("bounds must be finite")
    if np.any(lower >= upper):
        raise ValidationError("lower bounds must be strictly below upper bounds")
    return SwarmOptimizer(problem, lower, upper, config or PSOConfig()).run(seed)
