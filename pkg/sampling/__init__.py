# Monte Carlo sampling and snapshot assembly.
from sampling.snapshots import (
    SnapshotSet,
    assemble,
    from_raw,
    sample_designs,
    variance_convergence,
)
