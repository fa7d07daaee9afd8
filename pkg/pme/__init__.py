# Parametric model embedding: latent-to-design-variable reconstruction.
from pme.embedding import (
    DirectSolution,
    Embedding,
    bound_violation,
    embed,
    nse_per_sample_pme,
    overflow_fraction,
    project_design_space,
    reconstruct_geometry,
    reconstruct_u,
    sample_latent,
    solve_pme_direct,
    split_augmented,
)
