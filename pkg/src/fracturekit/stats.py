"""Dataset statistics: nearest-rank percentiles, piece convexity rank, and
exploded-view exports for offline gallery rendering."""

import numpy as np

from . import kernels
from .evalkit import sample_point_cloud
from .geom import extract_piece_surfaces, is_watertight, save_obj_groups

PERCENTILES = (25, 50, 75)


def nearest_rank_percentile(values, q):
    """Nearest-rank percentile: the ceil(q/100 * n)-th smallest value."""
    values = np.asarray(values)
    if len(values) == 0:
        raise ValueError("empty sample")
    if not 0 < q <= 100:
        raise ValueError("q must be in (0, 100]")
    return np.percentile(values, q, method="inverted_cdf")


def percentile_summary(values, qs=PERCENTILES):
    return {f"p{q}": float(nearest_rank_percentile(values, q)) for q in qs}


def convexity_rank(piece, rng, n_samples=300):
    """Weak-convexity proxy: normalized numerical rank of the mutual
    visibility matrix of surface samples.

    Two samples are mutually visible when the open segment between them
    never crosses the surface. A convex piece gives the all-ones matrix
    (normalized rank 1/n_samples); concavities raise the rank.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    if not is_watertight(piece):
        raise ValueError("convexity rank needs a closed surface")
    pts = sample_point_cloud(piece, n_samples, rng)
    iu, ju = np.triu_indices(n_samples, k=1)
    crossings = kernels.segment_mesh_crossings(
        pts[iu], pts[ju], piece.vertices, piece.faces, t_lo=1e-6
    )
    visible = np.ones((n_samples, n_samples), dtype=np.float64)
    blocked = crossings > 0
    visible[iu[blocked], ju[blocked]] = 0.0
    visible[ju[blocked], iu[blocked]] = 0.0
    rank = np.linalg.matrix_rank(visible)
    return float(rank) / n_samples


def explode_view(mesh, labels, spacing):
    """Pieces translated radially from the assembly centroid by spacing
    times their centroid offset; returns [(name, vertices, faces)]."""
    pieces = extract_piece_surfaces(mesh, labels)
    assembly_centroid = mesh.vertices.mean(axis=0)
    groups = []
    for idx, piece in enumerate(pieces):
        offset = spacing * (piece.vertices.mean(axis=0) - assembly_centroid)
        groups.append((f"piece_{idx:03d}", piece.vertices + offset, piece.faces))
    return groups


def explode_view_export(mesh, labels, spacing, path):
    save_obj_groups(path, explode_view(mesh, labels, spacing))


def manifest_statistics(manifest, qs=PERCENTILES):
    """Table of per-category percentile statistics pooled over patterns and
    pieces: pieces per pattern, vertices/faces/volume per piece, and the
    convexity rank where the pipeline recorded it."""
    pools = {}
    for shape_id, rec in sorted(manifest.get("shapes", {}).items()):
        if rec.get("status") != "ok":
            continue
        cat = rec.get("category", "other")
        pool = pools.setdefault(
            cat,
            {"objects": 0, "pieces_per_pattern": [], "vertices_per_piece": [],
             "faces_per_piece": [], "volume_per_piece": [], "convexity_rank": []},
        )
        pool["objects"] += 1
        for pat in rec.get("patterns", []):
            pool["pieces_per_pattern"].append(pat["piece_count"])
            pool["vertices_per_piece"].extend(pat.get("piece_vertex_counts", []))
            pool["faces_per_piece"].extend(pat.get("piece_face_counts", []))
            pool["volume_per_piece"].extend(pat.get("piece_volumes", []))
        pool["convexity_rank"].extend(rec.get("convexity_ranks", []))

    def summarize(pool):
        out = {"objects": pool["objects"]}
        for key in ("pieces_per_pattern", "vertices_per_piece", "faces_per_piece",
                    "volume_per_piece", "convexity_rank"):
            if pool[key]:
                out[key] = percentile_summary(pool[key], qs)
        return out

    report = {"categories": {cat: summarize(pool) for cat, pool in sorted(pools.items())}}
    merged = {"objects": 0, "pieces_per_pattern": [], "vertices_per_piece": [],
              "faces_per_piece": [], "volume_per_piece": [], "convexity_rank": []}
    for pool in pools.values():
        merged["objects"] += pool["objects"]
        for key in merged:
            if key != "objects":
                merged[key].extend(pool[key])
    report["overall"] = summarize(merged) if pools else {"objects": 0}
    return report


def format_statistics_table(report, qs=PERCENTILES):
    """Aligned-text rendering of manifest_statistics output."""
    metrics = ("pieces_per_pattern", "vertices_per_piece", "faces_per_piece",
               "volume_per_piece", "convexity_rank")
    rows = []
    header = ["category", "#O"]
    for metric in metrics:
        header.extend(f"{metric}.p{q}" for q in qs)
    rows.append(header)
    entries = list(report["categories"].items()) + [("all", report["overall"])]
    for cat, summary in entries:
        row = [cat, str(summary.get("objects", 0))]
        for metric in metrics:
            stats = summary.get(metric)
            for q in qs:
                row.append("-" if stats is None else f"{stats[f'p{q}']:.4g}")
        rows.append(row)
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows)
