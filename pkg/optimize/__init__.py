# Deterministic PSO in original, KLE and PME coordinates.
from optimize.compare import ComparisonReport, compare_spaces, evaluations_to_drop
from optimize.problems import (
    Constraint,
    DemoProblem,
    OptimizationProblem,
    OriginalSpace,
    ReducedSpace,
    demo_constraints,
    demo_objective,
    make_planted_problem,
    penalized_objective,
)
from optimize.pso import OptimizationTrace, PSOConfig, pso_minimize
