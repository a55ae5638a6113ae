"""Command-line interface.

Subcommands: gen (batch pipeline), modes (single-shape mode export),
pack/unpack (archive codec), stats (percentile report), eval (metrics on a
predictions file), sample (point-cloud export), explode (gallery export).
Exit codes: 0 success, 1 partial failures, 2 fatal.
"""

import argparse
import json
import os
import sys

import numpy as np


def _add_gen(sub):
    p = sub.add_parser("gen", help="run the batch fracture-dataset pipeline")
    p.add_argument("inputs", nargs="*", help="input OBJ files or globs")
    p.add_argument("--config", help="TOML config file (flags override it)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--grid-n", type=int, default=None, help="SDF grid resolution")
    p.add_argument("--cage-resolution", type=int, default=None)
    p.add_argument("--tet-resolution", type=int, default=None)
    p.add_argument("--modes", type=int, default=None, dest="k_modes", help="fracture modes per shape")
    p.add_argument("--impacts", type=int, default=None, help="impact patterns per shape")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (or env FRACTUREKIT_WORKERS)")
    p.add_argument("--pcr-pieces", type=int, default=None, help="convexity-rank samples per shape")
    p.add_argument("--include-modes", action="store_true", help="store the mode matrix in archives")
    return p


def _cmd_gen(args):
    from .pipeline import PipelineConfig, load_config, run_pipeline

    config = load_config(args.config) if args.config else PipelineConfig()
    if args.inputs:
        config.inputs = args.inputs
    if args.out is not None:
        config.output_dir = args.out
    if args.seed is not None:
        config.master_seed = args.seed
    if args.grid_n is not None:
        config.grid_n = args.grid_n
    if args.cage_resolution is not None:
        config.cage_resolution = args.cage_resolution
    if args.tet_resolution is not None:
        config.tet_resolution = args.tet_resolution
    if args.k_modes is not None:
        config.k_modes = args.k_modes
    if args.impacts is not None:
        config.n_impacts = args.impacts
    if args.workers is not None:
        config.workers = args.workers
    if args.pcr_pieces is not None:
        config.pcr_pieces_per_shape = args.pcr_pieces
    if args.include_modes:
        config.include_modes_in_archive = True

    manifest = run_pipeline(config)
    statuses = [rec["status"] for rec in manifest["shapes"].values()]
    n_err = sum(s != "ok" for s in statuses)
    for shape_id, rec in manifest["shapes"].items():
        line = f"{shape_id}: {rec['status']}"
        if rec["status"] != "ok":
            line += f" ({rec.get('error', 'unknown')})"
        print(line)
    print(f"{len(statuses) - n_err}/{len(statuses)} shapes ok; manifest at "
          f"{os.path.join(config.output_dir, 'manifest.json')}")
    return 1 if n_err else 0


def _add_modes(sub):
    p = sub.add_parser("modes", help="solve fracture modes for one shape and export OBJs")
    p.add_argument("input", help="input OBJ file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--modes", type=int, default=20, dest="k_modes")
    p.add_argument("--tet-resolution", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--displace", type=float, default=0.15, help="visual displacement scale")
    return p


def _cmd_modes(args):
    from .fem import continuous_operators, lift_discontinuous
    from .fracture import extract_pattern
    from .geom import (
        extract_piece_surfaces, load_surface_mesh, normalize_to_unit_box,
        save_obj_groups, tet_adjacency, tetrahedralize_voxels, voxelize_sdf,
    )
    from .modes import SolverConfig, fracture_modes

    mesh, _ = normalize_to_unit_box(load_surface_mesh(args.input))
    grid = voxelize_sdf(mesh, args.tet_resolution)
    tm = tetrahedralize_voxels(grid, grid.spacing)
    adjacency = tet_adjacency(tm)
    dops = lift_discontinuous(tm, continuous_operators(tm), adjacency)
    fmodes = fracture_modes(dops, SolverConfig(k=args.k_modes, seed=args.seed))

    os.makedirs(args.out, exist_ok=True)
    for r in range(fmodes.k):
        mode = fmodes.vectors[:, r]
        pattern = extract_pattern(tm, adjacency, mode, 1e-3)
        pieces = extract_piece_surfaces(tm, pattern.labels)
        disp = mode.reshape(tm.m, 4, 3)
        groups = []
        for lab, piece in enumerate(pieces):
            piece_tets = np.flatnonzero(pattern.labels == lab)
            mean_disp = disp[piece_tets].mean(axis=(0, 1))
            groups.append(
                (f"piece_{lab:03d}", piece.vertices + args.displace * mean_disp, piece.faces)
            )
        save_obj_groups(os.path.join(args.out, f"mode_{r:02d}.obj"), groups)
        print(f"mode {r:2d}: objective {fmodes.objectives[r]:.6g}, "
              f"{pattern.piece_count} pieces")
    return 0


def _add_pack(sub):
    p = sub.add_parser("pack", help="fracture one shape and write a .bbx archive")
    p.add_argument("input", help="input OBJ file")
    p.add_argument("--out", required=True, help="output .bbx path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--modes", type=int, default=20, dest="k_modes")
    p.add_argument("--impacts", type=int, default=80)
    p.add_argument("--tet-resolution", type=int, default=12)
    p.add_argument("--include-modes", action="store_true")
    return p


def _cmd_pack(args):
    from . import segpack
    from .fem import continuous_operators, lift_discontinuous
    from .fracture import ImpactConfig, generate_fractures
    from .geom import (
        load_surface_mesh, normalize_to_unit_box, tet_adjacency,
        tetrahedralize_voxels, voxelize_sdf,
    )
    from .modes import SolverConfig, fracture_modes

    mesh, _ = normalize_to_unit_box(load_surface_mesh(args.input))
    grid = voxelize_sdf(mesh, args.tet_resolution)
    tm = tetrahedralize_voxels(grid, grid.spacing)
    adjacency = tet_adjacency(tm)
    dops = lift_discontinuous(tm, continuous_operators(tm), adjacency)
    fmodes = fracture_modes(dops, SolverConfig(k=args.k_modes, seed=args.seed))
    rng = np.random.default_rng(args.seed)
    patterns = generate_fractures(
        tm, adjacency, dops, fmodes, ImpactConfig(n_impacts=args.impacts), rng
    )
    superseg = segpack.super_segmentation(tm, adjacency, fmodes)
    segpack.encode(tm, superseg, fmodes, patterns, args.out, include_modes=args.include_modes)
    size = os.path.getsize(args.out)
    print(f"{args.out}: {len(patterns)} patterns, {superseg.atomic_count} atomic pieces, {size} bytes")
    return 0


def _add_unpack(sub):
    p = sub.add_parser("unpack", help="decompress a .bbx archive to per-fracture OBJ folders")
    p.add_argument("archive", help=".bbx file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--patterns", default=None, help="comma-separated pattern indices (default all)")
    return p


def _cmd_unpack(args):
    from . import segpack
    from .geom import extract_piece_surfaces, save_surface_mesh

    dec = segpack.decode(args.archive)
    wanted = (
        [int(x) for x in args.patterns.split(",")]
        if args.patterns
        else range(len(dec.patterns))
    )
    for idx in wanted:
        pat = dec.patterns[idx]
        pat_dir = os.path.join(args.out, f"fracture_{idx:04d}")
        os.makedirs(pat_dir, exist_ok=True)
        for lab, piece in enumerate(extract_piece_surfaces(dec.mesh, pat.labels)):
            save_surface_mesh(os.path.join(pat_dir, f"piece_{lab:03d}.obj"), piece)
    print(f"wrote {len(list(wanted))} fracture folders to {args.out}")
    return 0


def _add_stats(sub):
    p = sub.add_parser("stats", help="percentile statistics from a manifest")
    p.add_argument("manifest", help="manifest.json from gen")
    p.add_argument("--json-out", default=None, help="write the report as JSON")
    return p


def _cmd_stats(args):
    from .stats import format_statistics_table, manifest_statistics

    with open(args.manifest, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    report = manifest_statistics(manifest)
    print(format_statistics_table(report))
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, sort_keys=True, indent=1)
    return 0


def _add_eval(sub):
    p = sub.add_parser("eval", help="evaluate predicted poses against an archive pattern")
    p.add_argument("archive", help=".bbx file")
    p.add_argument("--pattern", type=int, required=True)
    p.add_argument("--pred", required=True, help="predictions JSON")
    p.add_argument("--points", type=int, default=1000, help="samples per piece")
    p.add_argument("--seed", type=int, default=0, help="sampling/canonicalization seed")
    p.add_argument("--json-out", default=None)
    return p


def _load_poses(entries):
    from .evalkit import Pose

    poses = []
    for entry in entries:
        rot = np.asarray(entry["R"], dtype=np.float64).reshape(3, 3)
        poses.append(Pose(rotation=rot, translation=np.asarray(entry["T"], dtype=np.float64)))
    return poses


def make_instance(archive, pattern_index, n_points, seed):
    """Decode a pattern into an AssemblyInstance with self-supervised poses."""
    from . import segpack
    from .evalkit import AssemblyInstance, canonicalize_piece, sample_point_cloud
    from .geom import extract_piece_surfaces

    dec = segpack.decode(archive)
    pat = dec.patterns[pattern_index]
    pieces = extract_piece_surfaces(dec.mesh, pat.labels)
    rng = np.random.default_rng(seed)
    clouds, gt = [], []
    for piece in pieces:
        cloud = sample_point_cloud(piece, n_points, rng)
        canonical, pose = canonicalize_piece(cloud, rng)
        clouds.append(canonical)
        gt.append(pose)
    return AssemblyInstance(clouds=clouds, gt_poses=gt)


def _cmd_eval(args):
    from .evalkit import chamfer_distance, part_accuracy, transform_errors

    with open(args.pred, "r", encoding="utf-8") as fh:
        pred = json.load(fh)
    entries = pred["pieces"] if isinstance(pred, dict) else pred
    instance = make_instance(args.archive, args.pattern, args.points, args.seed)
    if len(entries) != instance.n_pieces:
        print(f"prediction has {len(entries)} pieces, pattern has {instance.n_pieces}", file=sys.stderr)
        return 2
    instance.pred_poses = _load_poses(entries)

    errs = transform_errors(instance)
    cd = chamfer_distance(
        instance.assembled(instance.pred_poses), instance.assembled(instance.gt_poses)
    )
    report = {
        "rmse_rot_deg": errs.rmse_rot,
        "mae_rot_deg": errs.mae_rot,
        "rmse_trans": errs.rmse_trans,
        "mae_trans": errs.mae_trans,
        "shape_chamfer_x1e3": 1e3 * cd,
        "part_accuracy_pct": part_accuracy(instance),
    }
    print(json.dumps(report, indent=1, sort_keys=True))
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, sort_keys=True, indent=1)
    return 0


def _add_sample(sub):
    p = sub.add_parser("sample", help="export sampled piece point clouds from an archive")
    p.add_argument("archive")
    p.add_argument("--pattern", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory (one .xyz per piece)")
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    return p


def _cmd_sample(args):
    from . import segpack
    from .evalkit import sample_point_cloud
    from .geom import extract_piece_surfaces

    dec = segpack.decode(args.archive)
    pat = dec.patterns[args.pattern]
    rng = np.random.default_rng(args.seed)
    os.makedirs(args.out, exist_ok=True)
    for lab, piece in enumerate(extract_piece_surfaces(dec.mesh, pat.labels)):
        cloud = sample_point_cloud(piece, args.points, rng)
        path = os.path.join(args.out, f"piece_{lab:03d}.xyz")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for x, y, z in cloud:
                fh.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
    print(f"wrote {pat.piece_count} clouds to {args.out}")
    return 0


def _add_explode(sub):
    p = sub.add_parser("explode", help="exploded-view OBJ of one pattern")
    p.add_argument("archive")
    p.add_argument("--pattern", type=int, required=True)
    p.add_argument("--spacing", type=float, default=1.0)
    p.add_argument("--out", required=True, help="output OBJ path")
    return p


def _cmd_explode(args):
    from . import segpack
    from .stats import explode_view_export

    dec = segpack.decode(args.archive)
    pat = dec.patterns[args.pattern]
    explode_view_export(dec.mesh, pat.labels, args.spacing, args.out)
    print(f"wrote {args.out} ({pat.piece_count} pieces)")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="fracturekit")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_gen(sub)
    _add_modes(sub)
    _add_pack(sub)
    _add_unpack(sub)
    _add_stats(sub)
    _add_eval(sub)
    _add_sample(sub)
    _add_explode(sub)
    args = parser.parse_args(argv)
    command = {
        "gen": _cmd_gen,
        "modes": _cmd_modes,
        "pack": _cmd_pack,
        "unpack": _cmd_unpack,
        "stats": _cmd_stats,
        "eval": _cmd_eval,
        "sample": _cmd_sample,
        "explode": _cmd_explode,
    }[args.command]
    try:
        return command(args)
    except BrokenPipeError:
        return 0
    except Exception as exc:
        print(f"fatal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
