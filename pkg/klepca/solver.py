"""
Generalized Karhunen-Loeve expansion (weighted PCA) of the geometry snapshots.

The 3L x 3L problem A G W Z = Z Lambda with A = D D^T / S is solved through the
S x S snapshot Gram matrix (1/S) D^T (G W) D, which is symmetric and shares the
nonzero spectrum. Modes come out normalized so that Z^T (G W) Z = I.
"""
import hashlib
import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import linalg

from config import settings
from config.errors import DegenerateSpectrumError, DimensionError, ValidationError
from geometry.shape import DiscreteShape, DisplacementField, check_conformance
from sampling.snapshots import SnapshotSet

logger = logging.getLogger(__name__)

NORMALIZATION = "Z^T (G W) Z = I on the geometry block"
SIGN_CONVENTION = "largest-magnitude entry positive, ties to lowest index"


@dataclass(frozen=True)
class ModalBasis:
    """
    Geometric modes of a snapshot set.

    Attributes:
        Z (np.ndarray): (3L, r) eigenvectors, one per nonzero eigenvalue
        eigenvalues (np.ndarray): (r,) descending, all positive
        sigma2 (float): total geometric variance (trace of the Gram matrix)
        N (int): modes retained at the configured confidence
        confidence (float): retained-variance level l
        source (str): provenance hash of the snapshot set the basis was solved from
    """
    Z: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray
    sigma2: float
    N: int
    confidence: float
    source: str
    normalization: str = NORMALIZATION
    sign_convention: str = SIGN_CONVENTION

    @property
    def rank(self) -> int:
        return self.eigenvalues.size

    @property
    def retained(self) -> np.ndarray:
        return self.Z[:, :self.N]

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.source.encode())
        h.update(f"{self.N}:{self.confidence!r}:{self.sigma2!r}".encode())
        h.update(np.ascontiguousarray(self.eigenvalues).tobytes())
        h.update(np.ascontiguousarray(self.Z).tobytes())
        return h.hexdigest()

    def truncated(self, N: int) -> "ModalBasis":
        """Same modes with a different retained count."""
        if not 1 <= N <= self.rank:
            raise ValidationError(f"N must lie in 1..{self.rank}, got {N}")
        return ModalBasis(self.Z, self.eigenvalues, self.sigma2, int(N), self.confidence, self.source)


@dataclass(frozen=True)
class ReducedVector:
    """Latent coordinates x of a shape in a modal basis."""
    values: np.ndarray
    basis: Optional[ModalBasis] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if self.basis is not None and values.size > self.basis.rank:
            raise DimensionError(f"{values.size} coordinates for a basis of rank {self.basis.rank}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


Coordinates = Union[ReducedVector, np.ndarray, list, tuple]


def as_coordinates(x: Coordinates) -> np.ndarray:
    return x.values if isinstance(x, ReducedVector) else np.asarray(x, dtype=float).reshape(-1)


def select_modes(eigenvalues, sigma2: float, confidence: float) -> int:
    """Smallest N with sum(lambda_1..N) >= confidence * sigma2 (equality at round-off counts)."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if not 0.0 < confidence <= 1.0:
        raise ValidationError(f"confidence must lie in (0, 1], got {confidence}")
    if eigenvalues.size == 0:
        raise DegenerateSpectrumError("empty spectrum")
    threshold = confidence * sigma2 * (1.0 - settings.SELECTION_TOLERANCE)
    cumulative = np.cumsum(eigenvalues)
    index = int(np.searchsorted(cumulative, threshold, side="left"))
    N = min(index + 1, eigenvalues.size)
    if cumulative[N - 1] < confidence * sigma2:
        logger.warning(f"N = {N} reaches l = {confidence} only within round-off "
                       f"({cumulative[N - 1] / sigma2:.12g} of the variance)")
    return N


def _fix_signs(Z: np.ndarray) -> np.ndarray:
    pivots = np.argmax(np.abs(Z), axis=0)
    signs = np.sign(Z[pivots, np.arange(Z.shape[1])])
    signs[signs == 0] = 1.0
    return Z * signs


def solve_kle(snapshots: SnapshotSet, shape: DiscreteShape,
              confidence: float = settings.CONFIDENCE) -> ModalBasis:
    """
    Solve the weighted eigenproblem by the method of snapshots and select N.

    Args:
        snapshots: centered snapshot set
        shape: baseline shape carrying the measures and weights
        confidence: retained-variance level l in (0, 1]

    Returns:
        ModalBasis with every eigenpair above the rank cutoff

    Raises:
        ValidationError: bad confidence, fewer than 2 samples
        DimensionError: D rows do not match 3L of the shape
        DegenerateSpectrumError: no variance in the weighted norm
    """
    if not 0.0 < confidence <= 1.0:
        raise ValidationError(f"confidence must lie in (0, 1], got {confidence}")
    D = snapshots.D
    S = snapshots.S
    if S < 2:
        raise ValidationError("need at least 2 snapshots")
    if D.shape[0] != 3 * shape.size:
        raise DimensionError(f"D has {D.shape[0]} rows, shape has 3L = {3 * shape.size}")

    gram = D.T @ (shape.gw_diagonal[:, None] * D) / S
    gram = 0.5 * (gram + gram.T)
    sigma2 = float(np.trace(gram))
    if not sigma2 > 0.0:
        raise DegenerateSpectrumError("snapshot matrix has no weighted variance")

    values, vectors = linalg.eigh(gram)
    values, vectors = values[::-1], vectors[:, ::-1]
    keep = values > settings.RANK_CUTOFF * values[0]
    values, vectors = values[keep], vectors[:, keep]

    Z = D @ vectors / np.sqrt(S * values)
    Z = _fix_signs(Z)
    N = select_modes(values, sigma2, confidence)
    for a in (Z, values):
        a.setflags(write=False)
    logger.info(f"KLE: rank {values.size}, sigma2 = {sigma2:.6g}, N = {N} at l = {confidence}")
    logger.debug(f"Leading eigenvalues: {values[:min(8, values.size)]}")
    return ModalBasis(Z, values, sigma2, N, float(confidence), snapshots.provenance)


def _modes(basis: ModalBasis, modes: Optional[int]) -> int:
    n = basis.N if modes is None else int(modes)
    if not 0 <= n <= basis.rank:
        raise DimensionError(f"requested {n} modes, basis rank is {basis.rank}")
    return n


def project_matrix(basis: ModalBasis, D: np.ndarray, shape: DiscreteShape,
                   modes: Optional[int] = None) -> np.ndarray:
    """Latent coordinates (n x S) of every column of a centered matrix."""
    n = _modes(basis, modes)
    return basis.Z[:, :n].T @ (shape.gw_diagonal[:, None] * D)


def project(basis: ModalBasis, d_hat, shape: DiscreteShape, modes: Optional[int] = None) -> ReducedVector:
    """x_k = z_k^T (G W) d_hat for k <= N (or the first `modes` modes)."""
    values = check_conformance(d_hat, shape)
    n = _modes(basis, modes)
    return ReducedVector(basis.Z[:, :n].T @ (shape.gw_diagonal * values), basis)


def reconstruct_shape(basis: ModalBasis, x: Coordinates, mean_delta) -> DisplacementField:
    """mean_delta + sum_k x_k z_k."""
    x = as_coordinates(x)
    if x.size > basis.rank:
        raise DimensionError(f"{x.size} coordinates for a basis of rank {basis.rank}")
    return DisplacementField(np.asarray(mean_delta, dtype=float) + basis.Z[:, :x.size] @ x)


def residuals(basis: ModalBasis, snapshots: SnapshotSet, shape: DiscreteShape, modes: int) -> np.ndarray:
    """Squared weighted reconstruction error of every snapshot with `modes` modes."""
    n = _modes(basis, modes)
    X = project_matrix(basis, snapshots.D, shape, n)
    R = snapshots.D - basis.Z[:, :n] @ X
    return shape.gw_diagonal @ (R ** 2)


def nmse(basis: ModalBasis, snapshots: SnapshotSet, shape: DiscreteShape,
         modes: Optional[int] = None) -> float:
    """Normalized mean squared reconstruction error of the training snapshots."""
    n = _modes(basis, modes)
    total = float(shape.gw_diagonal @ (snapshots.D ** 2).sum(axis=1))
    return float(residuals(basis, snapshots, shape, n).sum() / total)


def nse_per_sample(basis: ModalBasis, snapshots: SnapshotSet, shape: DiscreteShape,
                   modes: Optional[int] = None) -> np.ndarray:
    """Per-snapshot squared error normalized by the mean squared snapshot norm."""
    n = _modes(basis, modes)
    total = float(shape.gw_diagonal @ (snapshots.D ** 2).sum(axis=1))
    return residuals(basis, snapshots, shape, n) / (total / snapshots.S)


def nmse_curve(basis: ModalBasis, snapshots: SnapshotSet, shape: DiscreteShape) -> np.ndarray:
    """NMSE for N' = 0..rank, from the training projections."""
    total = float(shape.gw_diagonal @ (snapshots.D ** 2).sum(axis=1))
    X = project_matrix(basis, snapshots.D, shape, basis.rank)
    captured = np.concatenate(([0.0], np.cumsum((X ** 2).sum(axis=1))))
    return np.clip((total - captured) / total, 0.0, None)


def cumulative_variance(basis: ModalBasis) -> np.ndarray:
    """Fraction of sigma2 resolved by the first 1..rank modes."""
    return np.cumsum(basis.eigenvalues) / basis.sigma2
