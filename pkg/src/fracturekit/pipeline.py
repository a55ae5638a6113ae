"""Batch pipeline: per-shape fracture generation, archives, and the manifest.

Every shape runs normalize -> signed distance -> cage -> tets -> modes ->
patterns -> archive, with failures isolated per shape. Seeds derive from
(master seed, shape id), never from scheduling, so a run is byte-identical
regardless of worker count.
"""

import glob as globlib
import json
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import segpack
from .fem import Material, continuous_operators, lift_discontinuous
from .fracture import ImpactConfig, UnfracturableError, generate_fractures
from .geom import (
    extract_cage,
    extract_piece_surfaces,
    load_surface_mesh,
    normalize_to_unit_box,
    save_surface_mesh,
    tet_adjacency,
    tet_volumes,
    tetrahedralize_voxels,
    voxelize_sdf,
)
from .modes import SolverConfig, fracture_modes
from .stats import convexity_rank

WORKERS_ENV = "FRACTUREKIT_WORKERS"
CATEGORIES = ("everyday", "artifact", "other")


@dataclass
class PipelineConfig:
    inputs: list = field(default_factory=list)   # paths or globs
    output_dir: str = "out"
    master_seed: int = 0
    grid_n: int = 100            # SDF grid samples across the longest side
    cage_resolution: int = 32    # marching-cubes grid for the cage surface
    tet_resolution: int = 12     # voxel grid for the simulation tet mesh
    iso_offset_cells: float = 1.0
    k_modes: int = 20
    omega: float = 1e-3
    solver_max_iters: int = 200
    solver_tol_rel: float = 1e-5
    fault_eps: float = 1e-3
    tau_range: tuple = (0.05, 0.5)
    piece_bounds: tuple = (2, 100)
    n_impacts: int = 80
    max_attempts: int = 1000
    workers: int = 1
    youngs: float = 1.0
    poisson: float = 0.3
    density: float = 1.0
    include_modes_in_archive: bool = False
    pcr_pieces_per_shape: int = 0   # convexity ranks per shape (0 = off)
    pcr_samples: int = 300
    write_cage: bool = True

    def impact_config(self):
        return ImpactConfig(
            tau_range=tuple(self.tau_range),
            n_impacts=self.n_impacts,
            max_attempts=self.max_attempts,
            piece_bounds=tuple(self.piece_bounds),
        )

    def solver_config(self, seed):
        return SolverConfig(
            k=self.k_modes,
            omega=self.omega,
            max_iters=self.solver_max_iters,
            tol_rel=self.solver_tol_rel,
            seed=seed,
        )

    def material(self):
        return Material(youngs=self.youngs, poisson=self.poisson, density=self.density)


def load_config(path):
    """Read a TOML config file into a PipelineConfig."""
    import tomllib

    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    known = {f for f in PipelineConfig.__dataclass_fields__}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return PipelineConfig(**raw)


def shape_seed(master_seed, shape_id):
    """Stable per-shape seed independent of scheduling order."""
    return int(
        np.random.SeedSequence(
            [int(master_seed), zlib.crc32(shape_id.encode())]
        ).generate_state(1)[0]
    )


def infer_category(path):
    parent = os.path.basename(os.path.dirname(os.path.abspath(path))).lower()
    return parent if parent in CATEGORIES else "other"


def expand_inputs(inputs):
    """Expand globs, keep order, de-duplicate shape ids by suffixing."""
    paths = []
    for entry in inputs:
        hits = sorted(globlib.glob(entry)) if any(ch in entry for ch in "*?[") else [entry]
        paths.extend(hits)
    seen = {}
    out = []
    for path in paths:
        stem = os.path.splitext(os.path.basename(path))[0]
        count = seen.get(stem, 0)
        seen[stem] = count + 1
        out.append((stem if count == 0 else f"{stem}_{count}", path))
    return out


def process_shape(shape_id, path, config):
    """Run the whole per-shape flow; returns a manifest record."""
    record = {
        "category": infer_category(path),
        "input": path,
        "seed": shape_seed(config.master_seed, shape_id),
    }
    try:
        raw = load_surface_mesh(path)
        mesh, transform = normalize_to_unit_box(raw)
        record["normalization"] = {"scale": transform.scale, "offset": transform.offset.tolist()}
        bbox = mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)
        if abs(bbox.max() - 1.0) > 1e-12:
            raise RuntimeError("unit-box normalization failed")

        sdf = voxelize_sdf(mesh, config.grid_n)
        cell_vol = sdf.spacing**3
        record["sdf_grid"] = {
            "resolution": config.grid_n,
            "dims": list(sdf.dims),
            "spacing": sdf.spacing,
            "solid_volume_estimate": float((sdf.values < 0).sum() * cell_vol),
        }

        cage_grid = voxelize_sdf(mesh, config.cage_resolution)
        cage = extract_cage(cage_grid, config.iso_offset_cells * cage_grid.spacing)
        record["cage"] = {"vertices": cage.n_vertices, "faces": cage.n_faces}

        tet_grid = voxelize_sdf(mesh, config.tet_resolution)
        tm = tetrahedralize_voxels(tet_grid, config.iso_offset_cells * tet_grid.spacing)
        record["tets"] = tm.m
        record["vertices"] = tm.n

        adjacency = tet_adjacency(tm)
        ops = continuous_operators(tm, config.material())
        dops = lift_discontinuous(tm, ops, adjacency)
        fmodes = fracture_modes(dops, config.solver_config(record["seed"]))
        record["mode_objectives"] = [float(x) for x in fmodes.objectives]
        record["modes_converged"] = int(fmodes.converged.sum())

        rng = np.random.default_rng(record["seed"])
        patterns = generate_fractures(tm, adjacency, dops, fmodes, config.impact_config(), rng)

        superseg = segpack.super_segmentation(tm, adjacency, fmodes, config.fault_eps)
        record["atomic_pieces"] = superseg.atomic_count

        total_volume = float(tet_volumes(tm).sum())
        record["tet_volume"] = total_volume
        vols = tet_volumes(tm)
        pattern_rows = []
        worst_volume_err = 0.0
        for pat in patterns:
            piece_vols = np.bincount(pat.labels, weights=vols, minlength=pat.piece_count)
            surfaces = extract_piece_surfaces(tm, pat.labels)
            worst_volume_err = max(
                worst_volume_err,
                abs(piece_vols.sum() - total_volume) / total_volume,
            )
            pattern_rows.append(
                {
                    "tau": pat.tau,
                    "piece_count": pat.piece_count,
                    "provenance": pat.provenance,
                    "piece_tet_counts": np.bincount(
                        pat.labels, minlength=pat.piece_count
                    ).tolist(),
                    "piece_volumes": piece_vols.tolist(),
                    "piece_vertex_counts": [s.n_vertices for s in surfaces],
                    "piece_face_counts": [s.n_faces for s in surfaces],
                }
            )
        record["patterns"] = pattern_rows
        record["volume_accounting_worst_rel_err"] = worst_volume_err

        shape_dir = os.path.join(config.output_dir, shape_id)
        os.makedirs(shape_dir, exist_ok=True)
        if config.write_cage:
            save_surface_mesh(os.path.join(shape_dir, "cage.obj"), cage)
        archive_path = os.path.join(shape_dir, "archive.bbx")
        segpack.encode(
            tm, superseg, fmodes, patterns, archive_path,
            include_modes=config.include_modes_in_archive,
        )
        record["archive"] = os.path.relpath(archive_path, config.output_dir)

        if config.pcr_pieces_per_shape > 0:
            pcr_rng = np.random.default_rng(record["seed"] + 1)
            ranks = []
            flat = [
                (pi, si)
                for pi, pat in enumerate(patterns)
                for si in range(pat.piece_count)
            ]
            order = pcr_rng.permutation(len(flat))
            for pick in order[: config.pcr_pieces_per_shape]:
                pi, si = flat[pick]
                piece = extract_piece_surfaces(tm, patterns[pi].labels)[si]
                ranks.append(convexity_rank(piece, pcr_rng, config.pcr_samples))
            record["convexity_ranks"] = ranks

        record["status"] = "ok"
    except Exception as exc:  # per-shape isolation: record and continue
        record["status"] = "error"
        record["error"] = f"{type(exc).__name__}: {exc}"
    return shape_id, record


def _worker(args):
    return process_shape(*args)


def run_pipeline(config):
    """Process every input shape and write manifest.json in the output dir.

    Returns the manifest dict. Determinism: per-shape seeds depend only on
    (master seed, shape id); the manifest is assembled in input order.
    """
    shapes = expand_inputs(config.inputs)
    if not shapes:
        raise ValueError("no input shapes")
    os.makedirs(config.output_dir, exist_ok=True)

    workers = int(os.environ.get(WORKERS_ENV, config.workers))
    tasks = [(shape_id, path, config) for shape_id, path in shapes]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_worker, tasks))
    else:
        results = dict(map(_worker, tasks))

    manifest = {
        "config": _jsonable_config(config),
        "shapes": {shape_id: results[shape_id] for shape_id, _ in shapes},
    }
    manifest_path = os.path.join(config.output_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return manifest


def _jsonable_config(config):
    raw = asdict(config)
    raw["tau_range"] = list(raw["tau_range"])
    raw["piece_bounds"] = list(raw["piece_bounds"])
    return raw
