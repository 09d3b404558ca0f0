"""Stage orchestration: equilibria -> sample -> fit -> mesh.

Each stage reads the files written by the previous one, so stages can be
re-run independently; ``run_all`` simply runs them in order.
"""
from __future__ import annotations

import functools
import logging
import time
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from . import _backend
from .config import PipelineConfig, config_dict
from .dynamics import AttractorClassifier, equilibria
from .errors import BasinAtlasError, DependencyError, MeshingError
from .export import (read_cloud_csv, read_directions_csv, read_json, write_cloud_csv,
                     write_directions_csv, write_field_csv, write_json, write_obj, write_ply)
from .separatrix import boundary_name, sample_separatrices
from .surface import (ImplicitModel, augment, estimate_normals, extract_isosurface,
                      fit_implicit, sample_field)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SAMPLING = 3
EXIT_FITTING = 4
EXIT_MESHING = 5

CLOUD = "cloud.csv"
DIRECTIONS = "cloud_directions.csv"
EQUILIBRIA = "equilibria.json"
MODELS = "models.json"
REPORT = "report.json"


class StageError(Exception):
    """Wraps a failure with the exit code of the stage it happened in."""

    def __init__(self, stage: str, code: int, cause: BaseException):
        super().__init__(f"{stage} stage failed: {cause}")
        self.stage = stage
        self.code = code
        self.cause = cause


def _update_report(out: Path, section: str, payload: dict, cfg: PipelineConfig) -> None:
    path = out / REPORT
    report = read_json(path) if path.is_file() else {}
    report["backend"] = _backend.NAME
    report["config"] = config_dict(cfg)
    report[section] = payload
    write_json(path, report)


def _stage(name: str, code: int):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(cfg: PipelineConfig, out=None, **kw):
            out = Path(out if out is not None else cfg.output_dir)
            out.mkdir(parents=True, exist_ok=True)
            try:
                return fn(cfg, out, **kw)
            except BasinAtlasError as exc:
                raise StageError(name, code, exc) from exc
        return wrapper
    return deco


@_stage("equilibria", EXIT_SAMPLING)
def run_equilibria(cfg: PipelineConfig, out: Path) -> list:
    t0 = time.perf_counter()
    eqs = equilibria(cfg.params)
    write_json(out / EQUILIBRIA, {"params": cfg.params.to_dict(),
                                  "equilibria": [eq.to_dict() for eq in eqs]})
    _update_report(out, "equilibria", {
        "table": [eq.to_dict() for eq in eqs],
        "seconds": time.perf_counter() - t0,
    }, cfg)
    return eqs


@_stage("sample", EXIT_SAMPLING)
def run_sample(cfg: PipelineConfig, out: Path, threads: int | None = None):
    t0 = time.perf_counter()
    classify = AttractorClassifier(cfg.params, cfg.integrator)
    cloud = sample_separatrices(cfg.params, cfg.grid, cfg.bisection_tol, cfg.integrator,
                                threads=threads, classify=classify)
    write_cloud_csv(out / CLOUD, cloud)
    write_directions_csv(out / DIRECTIONS, cloud)
    _update_report(out, "sampling", {
        "points": len(cloud),
        "per_boundary": {boundary_name(k): len(v) for k, v in cloud.groups.items()},
        "stats": cloud.stats,
        "seconds": time.perf_counter() - t0,
    }, cfg)
    return cloud


def _load_cloud(out: Path):
    if not (out / CLOUD).is_file() or not (out / DIRECTIONS).is_file():
        raise DependencyError(f"{out / CLOUD} (and {DIRECTIONS}) not found; run the 'sample' stage first")
    pts, names = read_cloud_csv(out / CLOUD)
    dirs = read_directions_csv(out / DIRECTIONS)
    if len(dirs) != len(pts):
        raise DependencyError(f"{DIRECTIONS} has {len(dirs)} rows but {CLOUD} has {len(pts)}")
    groups: dict[str, np.ndarray] = {}
    for name in sorted(set(names)):
        sel = np.array([n == name for n in names])
        groups[name] = (pts[sel], dirs[sel])
    return groups


@_stage("fit", EXIT_FITTING)
def run_fit(cfg: PipelineConfig, out: Path) -> dict[str, ImplicitModel]:
    groups = _load_cloud(out)
    models, summary, files = {}, {}, {}
    for name, (pts, dirs) in groups.items():
        t0 = time.perf_counter()
        if len(pts) <= cfg.normal_k:
            log.warning("boundary %s has %d points (<= normal_k=%d); skipped", name, len(pts), cfg.normal_k)
            summary[name] = {"skipped": f"only {len(pts)} points"}
            continue
        oriented = estimate_normals(pts, cfg.normal_k, dirs)
        if cfg.delta is not None:
            delta = cfg.delta
        else:
            delta = cfg.delta_fraction * float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
        aug = augment(oriented, delta)
        pair = tuple(name.split("-"))
        model = fit_implicit(aug, cfg.cover, cfg.kernel, cfg.trunc_tol, pair=pair)
        fname = f"model_{name}.npz"
        model.save(out / fname)
        models[name] = model
        files[name] = fname
        summary[name] = {
            "points": int(len(pts)),
            "flagged_normals": int(oriented.flagged.sum()),
            "delta": delta,
            **model.diagnostics,
            "seconds": time.perf_counter() - t0,
        }
    if not models:
        raise DependencyError("no boundary had enough points to fit")
    write_json(out / MODELS, {"models": files})
    _update_report(out, "fitting", summary, cfg)
    return models


@_stage("mesh", EXIT_MESHING)
def run_mesh(cfg: PipelineConfig, out: Path) -> dict:
    manifest = out / MODELS
    if not manifest.is_file():
        raise DependencyError(f"{manifest} not found; run the 'fit' stage first")
    files = read_json(manifest)["models"]
    cloud = _load_cloud(out) if (out / CLOUD).is_file() and (out / DIRECTIONS).is_file() else {}
    summary, meshes = {}, {}
    for name, fname in files.items():
        if not (out / fname).is_file():
            raise DependencyError(f"fitted model {out / fname} not found; run the 'fit' stage first")
        t0 = time.perf_counter()
        model = ImplicitModel.load(out / fname)
        try:
            mesh = extract_isosurface(model, cfg.mesh_resolution)
        except ValueError as exc:
            raise MeshingError(str(exc)) from exc
        write_ply(out / f"boundary_{name}.ply", mesh)
        if cfg.mesh_obj:
            write_obj(out / f"boundary_{name}.obj", mesh)
        if cfg.field_csv:
            G, vals = sample_field(model, model.lo, model.hi, cfg.mesh_resolution)
            write_field_csv(out / f"field_{name}.csv", G, vals)
        meshes[name] = mesh
        summary[name] = {"vertices": int(len(mesh.vertices)), "faces": int(len(mesh.faces)),
                         "seconds": time.perf_counter() - t0}
        if name in cloud and not mesh.empty:
            # distance from each separatrix point to the nearest mesh vertex
            d, _ = cKDTree(mesh.vertices).query(cloud[name][0])
            summary[name]["cloud_to_mesh"] = {"median": float(np.median(d)), "max": float(d.max())}
    _update_report(out, "meshing", summary, cfg)
    return meshes


def run_all(cfg: PipelineConfig, out=None, threads: int | None = None) -> dict:
    """Run every stage; returns the final report."""
    out = Path(out if out is not None else cfg.output_dir)
    run_equilibria(cfg, out)
    run_sample(cfg, out, threads=threads)
    run_fit(cfg, out)
    run_mesh(cfg, out)
    return read_json(out / REPORT)
