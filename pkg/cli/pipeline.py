"""
Pipeline configuration and the stage runner behind the command-line front end.
"""
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from cli.presets import PRESETS, build_preset
from config import settings
from config.errors import ArchiveError, ConfigError, ProvenanceError, ValidationError
from geometry.io import read_geometry, write_geometry
from geometry.shape import DiscreteShape, element_measures, waterline_weights
from klepca.solver import cumulative_variance, nmse_curve, nse_per_sample, solve_kle
from optimize.compare import DROP_LEVELS, compare_spaces
from optimize.problems import (
    ORIGINAL,
    PME,
    SPACES,
    DemoProblem,
    OptimizationProblem,
    OriginalSpace,
    ReducedSpace,
    make_planted_problem,
)
from optimize.pso import PSOConfig
from parameterization.core import register
from parameterization.spec import ParameterizationSpec, load_spec
from pme.embedding import embed, nse_per_sample_pme, overflow_fraction, sample_latent
from sampling.snapshots import assemble, default_checkpoints, sample_designs, variance_convergence
from schemas.validator import validator
from storage.archive_manager import (
    EMBEDDING,
    OPTIMIZE,
    REPORT,
    SNAPSHOTS,
    ArchiveManager,
    config_hash,
)

logger = logging.getLogger(__name__)


def file_digest(path: str) -> str:
    try:
        with open(path, "rb") as f:
            return hashlib.sha256(f.read()).hexdigest()
    except OSError as e:
        raise ArchiveError(f"cannot read {path}: {e}") from e


@dataclass
class PipelineConfig:
    """
    Resolved run configuration.

    Attributes:
        spec: parameterization spec
        baseline: parent shape with measures and weights
        samples: Monte Carlo sample count S
        seed: sampling and optimizer seed
        confidence: retained-variance level l
        optimizer: optimizer block (validated against optimizer_config.json)
        output_dir: run directory
        document: the configuration as loaded, used for the config hash
    """
    spec: ParameterizationSpec
    baseline: DiscreteShape
    samples: int = settings.SAMPLES
    seed: int = settings.SEED
    confidence: float = settings.CONFIDENCE
    workers: int = settings.SAMPLING_WORKERS
    bound_margin: float = settings.BOUND_MARGIN
    optimizer: Dict[str, Any] = field(default_factory=dict)
    output_dir: str = settings.OUTPUT_DIR
    preset: Optional[str] = None
    document: Dict[str, Any] = field(default_factory=dict)

    @property
    def hash(self) -> str:
        return config_hash({k: v for k, v in self.document.items() if k != "output_dir"})


def _resolve(base_dir: str, path: str) -> str:
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def _custom_geometry(document: Dict[str, Any], base_dir: str) -> DiscreteShape:
    path = _resolve(base_dir, document["geometry"])
    waterline = document.get("waterline")
    shape = read_geometry(path, mirrored=document.get("mirrored", False), waterline=waterline)
    measures = document.get("measures", "file")
    if measures != "file":
        shape = shape.with_measures(element_measures(shape.nodes, shape.topology, measures))
    weights = document.get("weights", "file")
    if weights == "uniform":
        shape = shape.with_weights(np.ones(shape.size))
    elif weights == "waterline-mask":
        if waterline is None:
            raise ConfigError("the waterline-mask weight scheme needs a 'waterline' value")
        shape = shape.with_weights(waterline_weights(shape.nodes, waterline))
    return shape


def _check_hashes(document: Dict[str, Any], base_dir: str) -> None:
    for key, expected in document.get("hashes", {}).items():
        if key not in ("parameterization", "geometry") or key not in document:
            raise ConfigError(f"hash given for unknown file reference '{key}'")
        actual = file_digest(_resolve(base_dir, document[key]))
        if actual != expected:
            raise ProvenanceError(f"{document[key]} has hash {actual[:12]}, config expects {expected[:12]}")


def config_from_dict(document: Dict[str, Any], base_dir: str = ".") -> PipelineConfig:
    """
    Validate and resolve a pipeline configuration document.

    Raises:
        ConfigError: schema violation or inconsistent fields
        ProvenanceError: a referenced file does not match its recorded hash
    """
    error = validator.validate_pipeline_config(document)
    if error:
        raise ConfigError(error)
    optimizer = dict(document.get("optimizer", {}))
    preset = document.get("preset")
    if preset:
        spec, baseline = build_preset(preset)
        defaults = PRESETS[preset]
        optimizer = {**defaults["optimizer"], **optimizer}
        samples = document.get("samples", defaults["samples"])
        confidence = document.get("confidence", defaults["confidence"])
    else:
        for key in ("parameterization", "geometry"):
            if not os.path.exists(_resolve(base_dir, document[key])):
                raise ConfigError(f"referenced {key} file not found: {document[key]}")
        _check_hashes(document, base_dir)
        spec = load_spec(_resolve(base_dir, document["parameterization"]))
        baseline = _custom_geometry(document, base_dir)
        samples = document.get("samples", settings.SAMPLES)
        confidence = document.get("confidence", settings.CONFIDENCE)
    error = validator.validate_optimizer_config(optimizer)
    if error:
        raise ConfigError(error)
    output_dir = document.get("output_dir", settings.OUTPUT_DIR)
    return PipelineConfig(
        spec=spec,
        baseline=baseline,
        samples=int(samples),
        seed=int(document.get("seed", settings.SEED)),
        confidence=float(confidence),
        workers=int(document.get("workers", settings.SAMPLING_WORKERS)),
        bound_margin=float(document.get("bound_margin", settings.BOUND_MARGIN)),
        optimizer=optimizer,
        output_dir=_resolve(base_dir, output_dir),
        preset=preset,
        document=dict(document),
    )


def read_document(path: str):
    """Parsed config document and the directory relative paths resolve against."""
    try:
        with open(path, "r") as f:
            document = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    return document, os.path.dirname(os.path.abspath(path))


class PipelineRunner:
    """
    Runs the pipeline stages against one run directory.

    Each stage reads its upstream archives through ArchiveManager, so provenance
    checks happen on every load.
    """

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.logger = logging.getLogger(self.__class__.__name__)

    def archive(self) -> ArchiveManager:
        return ArchiveManager(self.config.output_dir)

    def sample(self) -> Dict[str, Any]:
        cfg = self.config
        designs = sample_designs(cfg.spec, cfg.samples, cfg.seed)
        snapshots = assemble(cfg.spec, cfg.baseline, designs, seed=cfg.seed, workers=cfg.workers)
        inert = bool(np.all(cfg.baseline.nodes[:, 2] == 0.0)
                     and np.all(snapshots.D[2 * cfg.baseline.size:] == 0.0))
        table = variance_convergence(snapshots, cfg.baseline, default_checkpoints(snapshots.S))
        with self.archive() as archive:
            archive.write_snapshots(snapshots, cfg.hash, cfg.spec.digest(), {"inert_xi3_block": inert})
            write_geometry(cfg.baseline, archive.path(SNAPSHOTS, "baseline.geo"))
            archive.write_table(REPORT, "variance_convergence.csv",
                                [{"S": s, "sigma2": v} for s, v in table])
        for count, value in table:
            print(f"S = {count:6d}  sigma2 = {value:.10g}")
        return {"rows": snapshots.D.shape[0], "S": snapshots.S, "sigma2": table[-1][1]}

    def reduce(self, confidence: Optional[float] = None) -> Dict[str, Any]:
        cfg = self.config
        level = cfg.confidence if confidence is None else confidence
        with self.archive() as archive:
            snapshots = archive.read_snapshots(cfg.hash)
            basis = solve_kle(snapshots, cfg.baseline, level)
            archive.write_basis(basis, cfg.hash)
            cumulative = cumulative_variance(basis)
            curve = nmse_curve(basis, snapshots, cfg.baseline)
            archive.write_table(REPORT, "spectrum.csv", [
                {"k": k + 1, "eigenvalue": float(lam), "cumulative_variance": float(cum)}
                for k, (lam, cum) in enumerate(zip(basis.eigenvalues, cumulative))
            ])
            archive.write_table(REPORT, "nmse.csv",
                                [{"N": n, "nmse": float(v)} for n, v in enumerate(curve)])
        print(f"N = {basis.N} of rank {basis.rank} at l = {level}; NMSE(N) = {curve[basis.N]:.6g}")
        return {"N": basis.N, "rank": basis.rank, "nmse": float(curve[basis.N])}

    def embed(self) -> Dict[str, Any]:
        cfg = self.config
        with self.archive() as archive:
            snapshots = archive.read_snapshots(cfg.hash)
            basis = archive.read_basis(snapshots, cfg.hash)
            emb = embed(snapshots, basis, cfg.baseline, cfg.bound_margin)
            archive.write_embedding(emb, cfg.hash)
            kle = nse_per_sample(basis, snapshots, cfg.baseline)
            pme = nse_per_sample_pme(emb, snapshots, cfg.baseline)
            archive.write_table(REPORT, "nse.csv", [
                {"sample": j + 1, "nse_kle": float(a), "nse_pme": float(b)}
                for j, (a, b) in enumerate(zip(kle, pme))
            ])
            overflow = overflow_fraction(emb, sample_latent(emb, settings.SAMPLES, cfg.seed))
            archive.write_table(REPORT, "embedding.csv", [
                {"M": emb.M, "N": emb.N, "overflow_fraction": overflow,
                 "max_nse_difference": float(np.max(np.abs(kle - pme)))}
            ])
        print(f"Embedded M = {emb.M} in N = {emb.N}; {overflow:.1%} of latent samples overflow the box")
        return {"N": emb.N, "overflow": overflow}

    def _demo_problem(self, archive: ArchiveManager, param, emb) -> DemoProblem:
        opt = self.config.optimizer
        weight = opt.get("roughness_weight", settings.ROUGHNESS_WEIGHT)
        if "target_u" in opt:
            target_u = np.asarray(opt["target_u"], dtype=float)
            if target_u.size != param.M:
                raise ConfigError(f"target_u has {target_u.size} entries, spec has M = {param.M}")
            return DemoProblem(param.baseline, param.shape(target_u), weight, target_u=target_u)
        if emb is None:
            archive.require(EMBEDDING)
        problem, _ = make_planted_problem(param, emb, roughness_weight=weight)
        return problem

    def _problems(self, spaces: List[str], param, emb, demo: DemoProblem) -> Dict[str, OptimizationProblem]:
        opt = self.config.optimizer
        constraints = demo.constraints if opt.get("constraints", True) else []
        problems = {}
        for space in spaces:
            if space == ORIGINAL:
                active = OriginalSpace(param)
                use_penalty = True
            else:
                active = ReducedSpace(emb, self.config.baseline, space)
                use_penalty = space == PME and opt.get("use_penalty", True)
            problems[space] = OptimizationProblem(active, demo.objective, constraints,
                                                  budget=int(opt.get("budget", 500)),
                                                  penalty_c=float(opt.get("penalty_c", settings.PENALTY_C)),
                                                  use_penalty=use_penalty)
        return problems

    def optimize(self, spaces: Optional[List[str]] = None) -> Dict[str, Any]:
        cfg = self.config
        opt = cfg.optimizer
        spaces = spaces or opt.get("spaces", list(SPACES))
        drops = tuple(float(d) for d in opt.get("drop_levels", DROP_LEVELS))
        param = register(cfg.spec, cfg.baseline)
        with self.archive() as archive:
            meta = {"stage": OPTIMIZE, "spaces": {}}
            if archive.has_stage(OPTIMIZE):
                meta = archive.read_meta(OPTIMIZE)
                archive.check_producer(OPTIMIZE, meta, cfg.hash)
            emb = None
            if any(s != ORIGINAL for s in spaces) or "target_u" not in opt:
                snapshots = archive.read_snapshots(cfg.hash)
                basis = archive.read_basis(snapshots, cfg.hash)
                emb = archive.read_embedding(basis, cfg.hash)
            demo = self._demo_problem(archive, param, emb)
            problems = self._problems(spaces, param, emb, demo)
            comparison = compare_spaces(problems, [int(opt.get("seed", 0))], demo.objective(cfg.baseline),
                                        PSOConfig.from_dict(opt), drops)
            archive.ensure_stage(OPTIMIZE)
            for result in comparison.results:
                space = result.space
                result.trace.write_csv(archive.path(OPTIMIZE, f"trace_{space}.csv"))
                archive.write_matrix(OPTIMIZE, f"best_point_{space}.csv", result.best_point)
                archive.write_matrix(OPTIMIZE, f"best_u_{space}.csv", result.best.u_hat)
                write_geometry(problems[space].space.shape(result.best_point),
                               archive.path(OPTIMIZE, f"best_{space}.geo"))
            results = {row["space"]: row for row in comparison.summary_rows()}
            for space, row in results.items():
                print(f"{space:8s} best {row['best_objective']:.6g} feasible {bool(row['final_feasible'])}")
            meta["spaces"].update(results)
            meta.update({
                "reference": comparison.reference,
                "drop_levels": list(comparison.drops),
                "floor": demo.floor,
                "target_u": [float(v) for v in demo.target_u] if demo.target_u is not None else None,
                "lower": [float(v) for v in cfg.spec.lower],
                "upper": [float(v) for v in cfg.spec.upper],
                "config_hash": cfg.hash,
            })
            archive.write_meta(OPTIMIZE, meta)
        return results


def report(run_dirs: List[str], out: Optional[str] = None) -> Dict[str, Any]:
    """
    Comparison tables over the optimization runs of one or more run directories.

    Summary rows, drop levels included, are the ones the optimize stage recorded.

    Raises:
        ValidationError: no run directories given
        MissingArchiveError: a directory has no optimization results
    """
    if not run_dirs:
        raise ValidationError("report needs at least one run directory")
    summary, designs = [], []
    for run_dir in run_dirs:
        archive = ArchiveManager(run_dir)
        meta = archive.read_meta(OPTIMIZE)
        spaces = sorted(meta["spaces"], key=lambda s: SPACES.index(s) if s in SPACES else len(SPACES))
        summary.extend({"run": run_dir, **meta["spaces"][space]} for space in spaces)
        best_u = {s: archive.read_matrix(OPTIMIZE, f"best_u_{s}.csv", ndmin=1) for s in spaces}
        for j, (lo, hi) in enumerate(zip(meta["lower"], meta["upper"])):
            row = {"run": run_dir, "dv": j + 1, "lower": lo, "upper": hi}
            if meta.get("target_u"):
                row["target"] = meta["target_u"][j]
            for space in spaces:
                row[space] = float(best_u[space][j])
            designs.append(row)
    with ArchiveManager(out or run_dirs[0]) as target:
        target.write_table(REPORT, "comparison.csv", summary)
        target.write_table(REPORT, "design_variables.csv", designs)
    for row in summary:
        print(f"{row['run']}: {row['space']:8s} best {row['best_objective']:.6g} "
              f"feasible {bool(row['final_feasible'])}")
    return {"summary": summary, "designs": designs}
