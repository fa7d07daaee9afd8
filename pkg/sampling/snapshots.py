"""
Monte Carlo sampling of the original design space and assembly of the centered
snapshot matrices D (3L x S) and U (M x S).
"""
import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from config import settings
from config.errors import DimensionError, SampleError, ValidationError
from geometry.shape import DiscreteShape
from parameterization.core import Parameterization, register
from parameterization.spec import DesignVector, ParameterizationSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SnapshotSet:
    """
    Centered snapshot data.

    Attributes:
        D (np.ndarray): (3L, S) centered displacement snapshots
        U (np.ndarray): (M, S) centered design vectors
        mean_delta (np.ndarray): (3L,) mean displacement
        mean_u (np.ndarray): (M,) mean design vector
        lower, upper (np.ndarray): (M,) box the designs were drawn from
        seed (int): generator seed the designs were drawn with
        provenance (str): SHA-256 of the data, used to link downstream archives
    """
    D: np.ndarray
    U: np.ndarray
    mean_delta: np.ndarray
    mean_u: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    seed: int
    provenance: str

    @property
    def S(self) -> int:
        return self.D.shape[1]

    @property
    def M(self) -> int:
        return self.U.shape[0]

    def designs(self) -> np.ndarray:
        """Raw design matrix (M, S)."""
        return self.U + self.mean_u[:, None]

    def displacements(self) -> np.ndarray:
        """Raw displacement matrix (3L, S)."""
        return self.D + self.mean_delta[:, None]


def make_generator(seed: int) -> np.random.Generator:
    """PCG64 bit generator: portable, so sample streams match across machines."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def sample_designs(spec: ParameterizationSpec, S: int, seed: int = settings.SEED) -> List[DesignVector]:
    """S design vectors drawn i.i.d. uniform inside the parameterization bounds."""
    if S < 2:
        raise ValidationError(f"need at least 2 samples, got {S}")
    lower, upper = spec.lower, spec.upper
    draws = make_generator(seed).random((S, spec.M))
    values = lower + draws * (upper - lower)
    logger.info(f"Drew {S} designs (M = {spec.M}) with seed {seed}")
    return [DesignVector(row, lower, upper) for row in values]


def center(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Two-pass row centering; returns (centered, mean)."""
    mean = matrix.mean(axis=1)
    centered = matrix - mean[:, None]
    mean = mean + centered.mean(axis=1)
    return matrix - mean[:, None], mean


def provenance_hash(*arrays, seed: int, tag: str = "") -> str:
    h = hashlib.sha256()
    h.update(tag.encode())
    h.update(str(int(seed)).encode())
    for a in arrays:
        a = np.ascontiguousarray(a, dtype=np.float64)
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def _evaluate(param: Parameterization, designs: Sequence[DesignVector], workers: int) -> np.ndarray:
    def one(index):
        try:
            return param.deform(designs[index]).values
        except Exception as e:
            logger.error(f"Deformation of sample {index} failed: {e}")
            raise SampleError(f"sample {index}: {e}", index) from e

    indices = range(len(designs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(one, indices))
    else:
        columns = [one(j) for j in indices]
    return np.column_stack(columns)


def assemble(spec: ParameterizationSpec, baseline: DiscreteShape, designs: Sequence[DesignVector],
             seed: int = settings.SEED, workers: int = settings.SAMPLING_WORKERS) -> SnapshotSet:
    """Evaluate every design and center the resulting matrices (columns in sample order)."""
    if not designs:
        raise ValidationError("no designs to assemble")
    param = register(spec, baseline)
    raw_u = np.column_stack([d.values for d in designs])
    raw_d = _evaluate(param, designs, workers)
    snapshots = from_raw(raw_d, raw_u, spec.lower, spec.upper, seed=seed, tag=spec.digest())
    logger.info(f"Assembled D {snapshots.D.shape} and U {snapshots.U.shape}")
    return snapshots


def from_raw(raw_d, raw_u, lower, upper, seed: int = 0, tag: str = "") -> SnapshotSet:
    """Center raw displacement (3L x S) and design (M x S) matrices into a SnapshotSet."""
    raw_d = np.asarray(raw_d, dtype=float)
    raw_u = np.asarray(raw_u, dtype=float)
    if raw_d.ndim != 2 or raw_u.ndim != 2 or raw_d.shape[1] != raw_u.shape[1]:
        raise DimensionError(f"incompatible snapshot matrices {raw_d.shape} and {raw_u.shape}")
    if raw_d.shape[1] < 2:
        raise ValidationError("need at least 2 samples")
    D, mean_delta = center(raw_d)
    U, mean_u = center(raw_u)
    lower = np.array(lower, dtype=float).reshape(-1)
    upper = np.array(upper, dtype=float).reshape(-1)
    if lower.size != U.shape[0] or upper.size != U.shape[0]:
        raise DimensionError(f"bounds of length {lower.size}, {upper.size} for M = {U.shape[0]}")
    for a in (D, U, mean_delta, mean_u, lower, upper):
        a.setflags(write=False)
    digest = provenance_hash(D, U, mean_delta, mean_u, lower, upper, seed=seed, tag=tag)
    return SnapshotSet(D, U, mean_delta, mean_u, lower, upper, int(seed), digest)


def weighted_column_norms(matrix: np.ndarray, shape: DiscreteShape) -> np.ndarray:
    """Squared weighted norm of every column."""
    return shape.gw_diagonal @ (np.asarray(matrix) ** 2)


def variance_convergence(snapshots: SnapshotSet, shape: DiscreteShape,
                         checkpoints: Sequence[int]) -> List[Tuple[int, float]]:
    """
    Geometric variance of the first S' snapshots, recentered on their own mean,
    for every checkpoint S'.
    """
    checkpoints = [int(c) for c in checkpoints]
    if any(c < 1 or c > snapshots.S for c in checkpoints):
        raise ValidationError(f"checkpoints must lie in 1..{snapshots.S}")
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise ValidationError("checkpoints must be increasing")
    raw = snapshots.displacements()
    out = []
    for count in checkpoints:
        sub, _ = center(raw[:, :count])
        out.append((count, float(weighted_column_norms(sub, shape).sum() / count)))
    return out


def default_checkpoints(S: int) -> List[int]:
    """Roughly logarithmic checkpoints ending at S."""
    points = sorted({int(round(v)) for v in np.geomspace(10, S, num=12) if 2 <= v <= S} | {S})
    return points
