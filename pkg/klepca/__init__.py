# Weighted KLE/PCA of geometry snapshots.
from klepca.solver import (
    ModalBasis,
    ReducedVector,
    cumulative_variance,
    nmse,
    nmse_curve,
    nse_per_sample,
    project,
    reconstruct_shape,
    select_modes,
    solve_kle,
)
