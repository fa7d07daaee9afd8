import csv
import hashlib
import json
import logging
import os
from typing import Any, Dict, List, Optional

import numpy as np

from config import settings
from config.errors import ArchiveError, MissingArchiveError, ProvenanceError
from klepca.solver import ModalBasis
from pme.embedding import Embedding
from sampling.snapshots import SnapshotSet, provenance_hash

SNAPSHOTS = "snapshots"
BASIS = "basis"
EMBEDDING = "embedding"
OPTIMIZE = "optimize"
REPORT = "report"

# command that produces each stage
PRODUCERS = {SNAPSHOTS: "sample", BASIS: "reduce", EMBEDDING: "embed", OPTIMIZE: "optimize"}


def config_hash(document: Dict[str, Any]) -> str:
    """SHA-256 of a JSON document in canonical form (sorted keys, no whitespace)."""
    text = json.dumps(document, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()


class ArchiveManager:
    """
    File-based persistence for the pipeline stages of one run directory.

    Every stage lives in its own sub-directory holding comma-delimited CSV
    matrices written with 17 significant digits and a ``meta.json`` with sorted
    keys. Each meta records the config hash of its producer and the hash of the
    upstream artifact it was computed from; reading an artifact against the
    wrong upstream raises ProvenanceError. Identical inputs therefore give
    byte-identical archives.

    Attributes:
        root (str): run directory
        logger (logging.Logger): Logger instance for this class
    """

    def __init__(self, root: str = settings.OUTPUT_DIR):
        """
        Initialize the ArchiveManager with a run directory.

        Args:
            root (str): Run directory. Defaults to settings.OUTPUT_DIR
        """
        self.root = root
        self.is_open = False
        self.logger = logging.getLogger(self.__class__.__name__)

    def __enter__(self):
        """
        Context manager entry method.

        Creates the run directory when entering a 'with' block.

        Returns:
            ArchiveManager: Self instance
        """
        self.open()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()

    def open(self):
        """
        Create the run directory if needed.

        Raises:
            ArchiveError: If the directory cannot be created
        """
        try:
            os.makedirs(self.root, exist_ok=True)
            self.is_open = True
            self.logger.info(f"Opened run directory {self.root}")
        except OSError as e:
            self.logger.error(f"Error creating run directory {self.root}: {e}")
            raise ArchiveError(f"cannot create run directory {self.root}: {e}") from e

    def close(self):
        if self.is_open:
            self.is_open = False
            self.logger.debug(f"Closed run directory {self.root}")

    # --- low-level helpers ---

    def stage_dir(self, stage: str) -> str:
        return os.path.join(self.root, stage)

    def path(self, stage: str, name: str) -> str:
        return os.path.join(self.stage_dir(stage), name)

    def has_stage(self, stage: str) -> bool:
        return os.path.exists(self.path(stage, "meta.json"))

    def require(self, stage: str) -> None:
        """
        Fail with an actionable message when a stage has not been produced.

        Raises:
            MissingArchiveError: naming the command that produces the stage
        """
        if not self.has_stage(stage):
            command = PRODUCERS.get(stage, stage)
            raise MissingArchiveError(
                f"no {stage} archive in {self.root}; run the '{command}' command first", stage
            )

    def check_producer(self, stage: str, meta: Dict[str, Any], producer_hash: Optional[str]) -> None:
        """
        Compare the config hash recorded by a stage with the current one.

        Raises:
            ProvenanceError: If the stage was produced under a different configuration
        """
        if producer_hash is None:
            return
        recorded = meta.get("config_hash")
        if recorded != producer_hash:
            raise ProvenanceError(
                f"{stage} archive in {self.root} was produced by config {str(recorded)[:12]}, "
                f"this run uses config {producer_hash[:12]}"
            )

    def ensure_stage(self, stage: str) -> str:
        directory = self.stage_dir(stage)
        try:
            os.makedirs(directory, exist_ok=True)
        except OSError as e:
            self.logger.error(f"Error creating {directory}: {e}")
            raise ArchiveError(f"cannot create {directory}: {e}") from e
        return directory

    def write_matrix(self, stage: str, name: str, matrix: np.ndarray) -> str:
        self.ensure_stage(stage)
        path = self.path(stage, name)
        matrix = np.atleast_1d(np.asarray(matrix, dtype=float))
        try:
            with open(path, "w", newline="\n") as f:
                np.savetxt(f, matrix, fmt=settings.FLOAT_FORMAT, delimiter=",")
        except OSError as e:
            self.logger.error(f"Error writing {path}: {e}")
            raise ArchiveError(f"cannot write {path}: {e}") from e
        return path

    def read_matrix(self, stage: str, name: str, ndmin: int = 2) -> np.ndarray:
        path = self.path(stage, name)
        try:
            return np.loadtxt(path, dtype=float, delimiter=",", ndmin=ndmin)
        except OSError as e:
            self.logger.error(f"Error reading {path}: {e}")
            raise ArchiveError(f"cannot read {path}: {e}") from e
        except ValueError as e:
            raise ArchiveError(f"malformed matrix file {path}: {e}") from e

    def write_meta(self, stage: str, meta: Dict[str, Any]) -> str:
        self.ensure_stage(stage)
        path = self.path(stage, "meta.json")
        try:
            with open(path, "w", newline="\n") as f:
                json.dump(meta, f, sort_keys=True, indent=2)
                f.write("\n")
        except OSError as e:
            self.logger.error(f"Error writing {path}: {e}")
            raise ArchiveError(f"cannot write {path}: {e}") from e
        return path

    def read_meta(self, stage: str) -> Dict[str, Any]:
        self.require(stage)
        path = self.path(stage, "meta.json")
        try:
            with open(path, "r") as f:
                return json.load(f)
        except OSError as e:
            self.logger.error(f"Error reading {path}: {e}")
            raise ArchiveError(f"cannot read {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ArchiveError(f"malformed meta file {path}: {e}") from e

    def write_table(self, stage: str, name: str, rows: List[Dict[str, Any]]) -> str:
        """Write a list of dicts as CSV; floats use the archive precision, missing cells stay empty."""
        self.ensure_stage(stage)
        path = self.path(stage, name)
        header = list(dict.fromkeys(key for row in rows for key in row))
        try:
            with open(path, "w", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(header)
                for row in rows:
                    writer.writerow([settings.FLOAT_FORMAT % v if isinstance(v, float) else v
                                     for v in (row.get(k, "") for k in header)])
        except OSError as e:
            self.logger.error(f"Error writing {path}: {e}")
            raise ArchiveError(f"cannot write {path}: {e}") from e
        return path

    def read_table(self, stage: str, name: str) -> List[Dict[str, str]]:
        path = self.path(stage, name)
        try:
            with open(path, "r", newline="") as f:
                return list(csv.DictReader(f))
        except OSError as e:
            self.logger.error(f"Error reading {path}: {e}")
            raise ArchiveError(f"cannot read {path}: {e}") from e

    def stage_digest(self, stage: str) -> str:
        """SHA-256 over every file of a stage, in name order."""
        self.require(stage)
        h = hashlib.sha256()
        directory = self.stage_dir(stage)
        for name in sorted(os.listdir(directory)):
            h.update(name.encode())
            with open(os.path.join(directory, name), "rb") as f:
                h.update(f.read())
        return h.hexdigest()

    # --- stages ---

    def write_snapshots(self, snapshots: SnapshotSet, producer_hash: str, spec_digest: str,
                        extra: Optional[Dict[str, Any]] = None) -> None:
        """
        Persist a snapshot set.

        Args:
            snapshots (SnapshotSet): centered snapshot data
            producer_hash (str): config hash of the producing command
            spec_digest (str): digest of the parameterization spec (part of the provenance)
            extra (dict, optional): additional meta entries
        """
        self.write_matrix(SNAPSHOTS, "D.csv", snapshots.D)
        self.write_matrix(SNAPSHOTS, "U.csv", snapshots.U)
        self.write_matrix(SNAPSHOTS, "means.csv", np.concatenate([snapshots.mean_delta, snapshots.mean_u]))
        self.write_matrix(SNAPSHOTS, "bounds.csv", np.vstack([snapshots.lower, snapshots.upper]))
        meta = {
            "stage": SNAPSHOTS,
            "S": snapshots.S,
            "M": snapshots.M,
            "rows": int(snapshots.D.shape[0]),
            "layout": "xi1 block, xi2 block, xi3 block",
            "means": "rows 1..3L mean displacement, then M mean design variables",
            "seed": snapshots.seed,
            "provenance": snapshots.provenance,
            "spec_digest": spec_digest,
            "config_hash": producer_hash,
        }
        meta.update(extra or {})
        self.write_meta(SNAPSHOTS, meta)
        self.logger.info(f"Saved snapshot archive ({snapshots.D.shape[0]} x {snapshots.S})")

    def read_snapshots(self, producer_hash: Optional[str] = None) -> SnapshotSet:
        """
        Load the snapshot set and verify its provenance hash.

        Args:
            producer_hash (str, optional): config hash the archive must have been produced with

        Raises:
            MissingArchiveError: If 'sample' has not been run
            ProvenanceError: If the stored data does not match its recorded hash,
                or the archive belongs to another configuration
        """
        meta = self.read_meta(SNAPSHOTS)
        self.check_producer(SNAPSHOTS, meta, producer_hash)
        D = self.read_matrix(SNAPSHOTS, "D.csv")
        U = self.read_matrix(SNAPSHOTS, "U.csv")
        means = self.read_matrix(SNAPSHOTS, "means.csv", ndmin=1)
        if means.size != D.shape[0] + U.shape[0]:
            raise ArchiveError(f"means.csv has {means.size} rows, expected {D.shape[0] + U.shape[0]}")
        mean_delta, mean_u = means[:D.shape[0]].copy(), means[D.shape[0]:].copy()
        lower, upper = self.read_matrix(SNAPSHOTS, "bounds.csv")
        for a in (D, U, mean_delta, mean_u, lower, upper):
            a.setflags(write=False)
        digest = provenance_hash(D, U, mean_delta, mean_u, lower, upper,
                                 seed=meta["seed"], tag=meta["spec_digest"])
        if digest != meta["provenance"]:
            raise ProvenanceError(f"snapshot archive in {self.root} does not match its recorded hash")
        return SnapshotSet(D, U, mean_delta, mean_u, lower, upper, int(meta["seed"]), digest)

    def write_basis(self, basis: ModalBasis, producer_hash: str) -> None:
        self.write_matrix(BASIS, "eigenvalues.csv", basis.eigenvalues)
        self.write_matrix(BASIS, "Z.csv", basis.Z)
        self.write_meta(BASIS, {
            "stage": BASIS,
            "confidence": basis.confidence,
            "N": basis.N,
            "rank": basis.rank,
            "sigma2": basis.sigma2,
            "normalization": basis.normalization,
            "sign_convention": basis.sign_convention,
            "upstream": basis.source,
            "digest": basis.digest(),
            "config_hash": producer_hash,
        })
        self.logger.info(f"Saved basis archive (rank {basis.rank}, N = {basis.N})")

    def read_basis(self, snapshots: Optional[SnapshotSet] = None,
                   producer_hash: Optional[str] = None) -> ModalBasis:
        """
        Load the modal basis, optionally checking it against its snapshot set.

        Raises:
            ProvenanceError: If the basis was solved from different snapshots
                or under another configuration
        """
        meta = self.read_meta(BASIS)
        self.check_producer(BASIS, meta, producer_hash)
        if snapshots is not None and meta["upstream"] != snapshots.provenance:
            raise ProvenanceError("basis archive was produced from a different snapshot archive")
        Z = self.read_matrix(BASIS, "Z.csv")
        eigenvalues = self.read_matrix(BASIS, "eigenvalues.csv", ndmin=1)
        for a in (Z, eigenvalues):
            a.setflags(write=False)
        basis = ModalBasis(Z, eigenvalues, float(meta["sigma2"]), int(meta["N"]),
                           float(meta["confidence"]), meta["upstream"])
        if basis.digest() != meta["digest"]:
            raise ProvenanceError(f"basis archive in {self.root} does not match its recorded hash")
        return basis

    def write_embedding(self, emb: Embedding, producer_hash: str) -> None:
        self.write_matrix(EMBEDDING, "V.csv", emb.V)
        self.write_matrix(EMBEDDING, "mean_u.csv", emb.mean_u)
        self.write_matrix(EMBEDDING, "mean_delta.csv", emb.mean_delta)
        self.write_matrix(EMBEDDING, "x_bounds.csv", np.vstack([emb.x_lower, emb.x_upper]))
        self.write_matrix(EMBEDDING, "u_bounds.csv", np.vstack([emb.u_lower, emb.u_upper]))
        self.write_meta(EMBEDDING, {
            "stage": EMBEDDING,
            "N": emb.N,
            "M": emb.M,
            "margin": emb.margin,
            "upstream": emb.basis.digest(),
            "digest": emb.digest(),
            "config_hash": producer_hash,
        })
        self.logger.info(f"Saved embedding archive (M = {emb.M}, N = {emb.N})")

    def read_embedding(self, basis: ModalBasis, producer_hash: Optional[str] = None) -> Embedding:
        """
        Load the embedding on top of an already loaded basis.

        Raises:
            ProvenanceError: If the embedding was built on a different basis
                or under another configuration
        """
        meta = self.read_meta(EMBEDDING)
        self.check_producer(EMBEDDING, meta, producer_hash)
        if meta["upstream"] != basis.digest():
            raise ProvenanceError("embedding archive was produced from a different basis archive")
        V = self.read_matrix(EMBEDDING, "V.csv")
        mean_u = self.read_matrix(EMBEDDING, "mean_u.csv", ndmin=1)
        mean_delta = self.read_matrix(EMBEDDING, "mean_delta.csv", ndmin=1)
        x_lower, x_upper = self.read_matrix(EMBEDDING, "x_bounds.csv")
        u_lower, u_upper = self.read_matrix(EMBEDDING, "u_bounds.csv")
        arrays = [V, mean_u, mean_delta, x_lower, x_upper, u_lower, u_upper]
        for a in arrays:
            a.setflags(write=False)
        return Embedding(basis, *arrays, margin=float(meta["margin"]))
