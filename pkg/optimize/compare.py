"""
Side-by-side optimization runs in the original, KLE and PME spaces.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.errors import ValidationError
from optimize.problems import OptimizationProblem
from optimize.pso import OptimizationTrace, PSOConfig, pso_minimize

logger = logging.getLogger(__name__)

DROP_LEVELS = (0.25, 0.30, 0.35)


def evaluations_to_drop(trace: OptimizationTrace, reference: float,
                        drops: Sequence[float] = DROP_LEVELS) -> Dict[float, Optional[int]]:
    """
    Evaluation count at which the running best first reaches reference * (1 - drop).

    None when the level is never reached.
    """
    return drop_counts(trace.best_history(), reference, drops)


def drop_counts(best: np.ndarray, reference: float, drops: Sequence[float] = DROP_LEVELS) -> Dict[float, Optional[int]]:
    """First 1-based index where a running-best history reaches each drop level."""
    if reference <= 0:
        raise ValidationError(f"reference objective must be positive, got {reference}")
    best = np.asarray(best, dtype=float)
    out = {}
    for drop in drops:
        hit = np.nonzero(best <= reference * (1.0 - drop))[0]
        out[float(drop)] = int(hit[0]) + 1 if hit.size else None
    return out


@dataclass
class SpaceResult:
    space: str
    seed: int
    best_point: np.ndarray
    trace: OptimizationTrace

    @property
    def best(self):
        return self.trace.best_record

    @property
    def final_feasible(self) -> bool:
        return self.best.bounds_feasible and self.best.constraints_feasible

    @property
    def any_infeasible_incumbent(self) -> bool:
        return any(not (r.bounds_feasible and r.constraints_feasible) for r in self.trace.incumbents())


@dataclass
class ComparisonReport:
    reference: float
    drops: Tuple[float, ...]
    results: List[SpaceResult] = field(default_factory=list)

    def summary_rows(self) -> List[dict]:
        rows = []
        for r in self.results:
            reached = evaluations_to_drop(r.trace, self.reference, self.drops)
            row = {
                "space": r.space,
                "seed": r.seed,
                "evaluations": len(r.trace),
                "best_objective": r.best.objective,
                "best_penalized": r.best.penalized,
                "final_feasible": int(r.final_feasible),
                "any_infeasible_incumbent": int(r.any_infeasible_incumbent),
            }
            for drop, count in reached.items():
                row[f"evals_to_{drop:g}"] = "" if count is None else count
            rows.append(row)
        return rows


def compare_spaces(problems: Dict[str, OptimizationProblem], seeds: Sequence[int],
                   reference: float, config: Optional[PSOConfig] = None,
                   drops: Sequence[float] = DROP_LEVELS) -> ComparisonReport:
    """
    Run every problem once per seed.

    Args:
        problems: one problem per space name, sharing objective and budget
        seeds: Halton offsets, identical across spaces
        reference: objective of the baseline, used for the drop levels
    """
    budgets = {p.budget for p in problems.values()}
    if len(budgets) > 1:
        raise ValidationError(f"spaces must share one budget, got {sorted(budgets)}")
    if not seeds:
        raise ValidationError("at least one seed is required")
    report = ComparisonReport(float(reference), tuple(float(d) for d in drops))
    for space, problem in problems.items():
        for seed in seeds:
            best_point, trace = pso_minimize(problem, seed=int(seed), config=config)
            report.results.append(SpaceResult(space, int(seed), best_point, trace))
            logger.info(f"{space} seed {seed}: best {trace.best_record.penalized:.6g}")
    return report
