"""
Design-variable embedding on top of a KLE basis.

The augmented snapshot matrix P = [D; U] is weighted with W_u = 0 on the design
block, so its eigenvectors split into the geometric modes Z and embedding modes
V with V = C (G W) Z Lambda^-1, C = U D^T / S. The closed form is the production
path; solve_pme_direct assembles the augmented matrix and is kept as an oracle.
"""
import hashlib
import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy import linalg

from config import settings
from config.errors import (
    DegenerateSpectrumError,
    DimensionError,
    ProvenanceError,
    SizeCapError,
    ValidationError,
)
from geometry.shape import DiscreteShape, DisplacementField, check_conformance
from klepca.solver import Coordinates, ModalBasis, ReducedVector, as_coordinates, select_modes
from parameterization.spec import DesignVector
from sampling.snapshots import SnapshotSet, make_generator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Embedding:
    """
    Embedding of the original design variables in the reduced space.

    Attributes:
        basis (ModalBasis): geometric modes the embedding extends
        V (np.ndarray): (M, N) embedding vectors, column k paired with mode k
        mean_u (np.ndarray): (M,) mean design vector
        mean_delta (np.ndarray): (3L,) mean displacement
        x_lower, x_upper (np.ndarray): (N,) latent box from the training projections
        u_lower, u_upper (np.ndarray): (M,) original design box
        margin (float): fractional inflation applied to the latent box
    """
    basis: ModalBasis = field(repr=False)
    V: np.ndarray = field(repr=False)
    mean_u: np.ndarray
    mean_delta: np.ndarray = field(repr=False)
    x_lower: np.ndarray
    x_upper: np.ndarray
    u_lower: np.ndarray
    u_upper: np.ndarray
    margin: float = 0.0

    @property
    def N(self) -> int:
        return self.V.shape[1]

    @property
    def M(self) -> int:
        return self.V.shape[0]

    @property
    def augmented_modes(self) -> np.ndarray:
        """Z~ = [Z; V] over the retained modes."""
        return np.vstack([self.basis.retained, self.V])

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.basis.digest().encode())
        for a in (self.V, self.mean_u, self.x_lower, self.x_upper):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()


def _augmented_weights(shape: DiscreteShape, M: int) -> np.ndarray:
    """Diagonal of G~ W~: geometry block G W, design block zero."""
    return np.concatenate([shape.gw_diagonal, np.zeros(M)])


def latent_coordinates(V: np.ndarray, basis: ModalBasis, snapshots: SnapshotSet,
                       shape: DiscreteShape) -> np.ndarray:
    """alpha_j = Z~^T G~ W~ p_j for every column of P = [D; U] (N x S)."""
    P = np.vstack([snapshots.D, snapshots.U])
    Z_tilde = np.vstack([basis.retained, V])
    return Z_tilde.T @ (_augmented_weights(shape, snapshots.M)[:, None] * P)


def embed(snapshots: SnapshotSet, basis: ModalBasis, shape: DiscreteShape,
          margin: float = settings.BOUND_MARGIN) -> Embedding:
    """
    Compute V over the retained modes and the latent bounds.

    Raises:
        ProvenanceError: basis was solved from a different snapshot set
        DimensionError: shape does not match the snapshots
    """
    if basis.source != snapshots.provenance:
        raise ProvenanceError(
            f"basis comes from snapshots {basis.source[:12]}, got {snapshots.provenance[:12]}"
        )
    if snapshots.D.shape[0] != 3 * shape.size:
        raise DimensionError(f"D has {snapshots.D.shape[0]} rows, shape has 3L = {3 * shape.size}")
    if margin < 0:
        raise ValidationError(f"margin must be non-negative, got {margin}")

    S = snapshots.S
    Z = basis.retained
    lam = basis.eigenvalues[:basis.N]
    C = snapshots.U @ snapshots.D.T / S
    V = C @ (shape.gw_diagonal[:, None] * Z) / lam

    alpha = latent_coordinates(V, basis, snapshots, shape)
    x_lower, x_upper = alpha.min(axis=1), alpha.max(axis=1)
    span = x_upper - x_lower
    x_lower, x_upper = x_lower - margin * span, x_upper + margin * span

    arrays = [np.array(a, dtype=float) for a in
              (V, snapshots.mean_u, snapshots.mean_delta, x_lower, x_upper,
               snapshots.lower, snapshots.upper)]
    for a in arrays:
        a.setflags(write=False)
    logger.info(f"Embedded M = {snapshots.M} design variables in N = {basis.N} latent variables")
    return Embedding(basis, *arrays, margin=float(margin))


def reconstruct_u(emb: Embedding, x: Coordinates) -> DesignVector:
    """u_hat = <u> + V x; may leave the original box."""
    x = as_coordinates(x)
    if x.size != emb.N:
        raise DimensionError(f"expected {emb.N} latent coordinates, got {x.size}")
    return DesignVector(emb.mean_u + emb.V @ x, emb.u_lower, emb.u_upper)


def reconstruct_geometry(emb: Embedding, x: Coordinates) -> DisplacementField:
    """Shape modification <delta> + Z x for latent coordinates x."""
    x = as_coordinates(x)
    if x.size != emb.N:
        raise DimensionError(f"expected {emb.N} latent coordinates, got {x.size}")
    return DisplacementField(emb.mean_delta + emb.basis.retained @ x)


def project_design_space(emb: Embedding, d_hat, shape: DiscreteShape) -> ReducedVector:
    """Latent coordinates of a centered displacement (the design block carries no weight)."""
    values = check_conformance(d_hat, shape)
    p = np.concatenate([values, np.zeros(emb.M)])
    return ReducedVector(emb.augmented_modes.T @ (_augmented_weights(shape, emb.M) * p), emb.basis)


def bound_violation(u_hat: DesignVector) -> float:
    """Sum of per-component distances outside the box; zero iff feasible."""
    excess = np.maximum.reduce([u_hat.lower - u_hat.values,
                                u_hat.values - u_hat.upper,
                                np.zeros(u_hat.M)])
    return float(excess.sum())


def nse_per_sample_pme(emb: Embedding, snapshots: SnapshotSet, shape: DiscreteShape) -> np.ndarray:
    """Per-snapshot NSE evaluated on the augmented matrix with G~ W~."""
    if emb.basis.source != snapshots.provenance:
        raise ProvenanceError("embedding and snapshots come from different samples")
    P = np.vstack([snapshots.D, snapshots.U])
    weights = _augmented_weights(shape, snapshots.M)
    Z_tilde = emb.augmented_modes
    alpha = Z_tilde.T @ (weights[:, None] * P)
    R = P - Z_tilde @ alpha
    errors = weights @ (R ** 2)
    total = float(weights @ (P ** 2).sum(axis=1))
    return errors / (total / snapshots.S)


def sample_latent(emb: Embedding, count: int, seed: int = settings.SEED) -> np.ndarray:
    """`count` latent points (count x N) uniform in [x_lower, x_upper]."""
    if count < 1:
        raise ValidationError(f"count must be positive, got {count}")
    draws = make_generator(seed).random((count, emb.N))
    return emb.x_lower + draws * (emb.x_upper - emb.x_lower)


def overflow_fraction(emb: Embedding, latent: np.ndarray) -> float:
    """Fraction of latent points whose u_hat leaves the original box."""
    latent = np.atleast_2d(latent)
    u_hat = emb.mean_u[None, :] + latent @ emb.V.T
    outside = np.any((u_hat < emb.u_lower) | (u_hat > emb.u_upper), axis=1)
    fraction = float(outside.mean())
    logger.info(f"{fraction:.1%} of {latent.shape[0]} latent samples map outside the design box")
    return fraction


class DirectSolution(NamedTuple):
    """Augmented eigenpairs and the mode count they retain at the requested confidence."""
    eigenvalues: np.ndarray
    Z_tilde: np.ndarray
    N: int


def solve_pme_direct(snapshots: SnapshotSet, shape: DiscreteShape,
                     confidence: float = settings.CONFIDENCE,
                     cap: int = settings.DIRECT_SOLVE_CAP) -> DirectSolution:
    """
    Dense eigensolve of the assembled (3L+M) x (3L+M) matrix A~ G~ W~.

    Returns:
        DirectSolution with eigenvalues and Z_tilde sorted by descending
        eigenvalue (real parts only) and N selected from the nonzero spectrum

    Raises:
        SizeCapError: 3L + M above the cap
        DegenerateSpectrumError: no variance in the weighted norm
    """
    size = snapshots.D.shape[0] + snapshots.M
    if size > cap:
        raise SizeCapError(f"augmented problem of size {size} exceeds the direct-solve cap {cap}")
    if snapshots.D.shape[0] != 3 * shape.size:
        raise DimensionError(f"D has {snapshots.D.shape[0]} rows, shape has 3L = {3 * shape.size}")
    P = np.vstack([snapshots.D, snapshots.U])
    A_tilde = P @ P.T / snapshots.S
    matrix = A_tilde * _augmented_weights(shape, snapshots.M)[None, :]
    values, vectors = linalg.eig(matrix)
    order = np.argsort(-values.real, kind="stable")
    values, vectors = values.real[order], vectors.real[:, order]
    sigma2 = float(shape.gw_diagonal @ (snapshots.D ** 2).sum(axis=1)) / snapshots.S
    if not sigma2 > 0.0:
        raise DegenerateSpectrumError("snapshot matrix has no weighted variance")
    positive = values[values > settings.RANK_CUTOFF * values[0]]
    N = select_modes(positive, sigma2, confidence)
    logger.debug(f"Direct PME solve: {positive.size} nonzero eigenvalues, N = {N} at l = {confidence}")
    return DirectSolution(values, vectors, N)


def split_augmented(values: np.ndarray, Z_tilde: np.ndarray, shape: DiscreteShape,
                    M: int, count: int, reference: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Rescale the first `count` augmented eigenvectors to Z^T (G W) Z = I and split them.

    `reference` (3L x count) fixes signs to match an existing basis.
    """
    upper, lower = Z_tilde[:-M, :count], Z_tilde[-M:, :count]
    norms = np.sqrt(shape.gw_diagonal @ (upper ** 2))
    upper, lower = upper / norms, lower / norms
    if reference is not None:
        signs = np.sign(np.sum(reference * shape.gw_diagonal[:, None] * upper, axis=0))
        signs[signs == 0] = 1.0
        upper, lower = upper * signs, lower * signs
    return upper, lower
