"""Impact sampling, projection onto fracture modes, and pattern extraction.

An impact is a Gaussian-falloff displacement field applied at a random
boundary vertex. Projected onto the precomputed modes it can only be
discontinuous across faces that are faults of at least one mode, so
thresholding its per-face jumps yields an impact-dependent fracture
pattern at essentially the cost of a few matrix-vector products.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


class UnfracturableError(RuntimeError):
    """A shape failed to produce the requested number of valid patterns."""


@dataclass
class ImpactConfig:
    tau_range: tuple = (0.05, 0.5)
    falloff_sigma: float = 0.3
    magnitude_range: tuple = (0.25, 4.0)  # log-uniform
    n_impacts: int = 80
    max_attempts: int = 1000
    piece_bounds: tuple = (2, 100)

    def __post_init__(self):
        lo, hi = self.tau_range
        if not 0.0 < lo <= hi:
            raise ValueError("tau_range must satisfy 0 < min <= max")
        if self.falloff_sigma <= 0.0:
            raise ValueError("falloff_sigma must be positive")
        lo_m, hi_m = self.magnitude_range
        if lo_m < 0.0 or lo_m > hi_m or (lo_m == 0.0 and hi_m > 0.0):
            raise ValueError("magnitude_range must be ordered, positive or exactly (0, 0)")


@dataclass
class FracturePattern:
    labels: np.ndarray      # per-tet piece id, 0..piece_count-1
    piece_count: int
    tau: float
    provenance: dict = field(default_factory=dict)  # JSON-serializable


def sample_impact(mesh, rng, cfg, boundary_ids=None):
    """Gaussian-falloff impact field at a uniform-random boundary vertex.

    Corner c of the mesh receives magnitude * direction * exp(-|x_c - p|^2
    / (2 sigma^2)). Draws consume the rng in a fixed order (vertex,
    direction, magnitude) so fields are reproducible from the stream state.
    """
    from .geom import boundary_vertex_ids

    if boundary_ids is None:
        boundary_ids = boundary_vertex_ids(mesh)
    point = mesh.vertices[boundary_ids[int(rng.integers(len(boundary_ids)))]]
    direction = rng.standard_normal(3)
    nrm = np.linalg.norm(direction)
    direction = direction / nrm if nrm > 0 else np.array([1.0, 0.0, 0.0])
    lo, hi = cfg.magnitude_range
    if lo == hi:
        magnitude = float(lo)
    else:
        magnitude = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    corners = mesh.vertices[mesh.tets].reshape(-1, 3)
    falloff = np.exp(-((corners - point) ** 2).sum(axis=1) / (2.0 * cfg.falloff_sigma**2))
    w = (magnitude * falloff)[:, None] * direction
    return w.reshape(-1), {
        "point": point.tolist(),
        "direction": direction.tolist(),
        "magnitude": magnitude,
    }


def project_impact(fmodes, mass, w):
    """Project an impact field onto the span of the fracture modes:
    w* = U (U^T M w). Linear in mesh size once the modes are in hand."""
    return fmodes.vectors @ (fmodes.vectors.T @ (mass @ w))


def _face_jump_norms(mesh, adjacency, corner_field):
    vals = np.asarray(corner_field, dtype=np.float64).reshape(mesh.m, 4, 3)
    side_a = vals[adjacency.tet_a[:, None], adjacency.corner_a]  # (F, 3, 3)
    side_b = vals[adjacency.tet_b[:, None], adjacency.corner_b]
    return np.linalg.norm((side_a - side_b).reshape(-1, 9), axis=1)


def labels_from_broken(m, adjacency, broken_mask):
    """Connected tet components under the unbroken-face graph, labeled by
    ascending smallest tet index."""
    keep = ~np.asarray(broken_mask, dtype=bool)
    graph = sp.coo_matrix(
        (np.ones(int(keep.sum())), (adjacency.tet_a[keep], adjacency.tet_b[keep])),
        shape=(m, m),
    )
    n_comp, raw = connected_components(graph, directed=False)
    # csgraph labels by first occurrence, i.e. already ascending smallest
    # tet index; renumber defensively anyway.
    first = np.full(n_comp, m, dtype=np.int64)
    np.minimum.at(first, raw, np.arange(m))
    remap = np.empty(n_comp, dtype=np.int64)
    remap[np.argsort(first)] = np.arange(n_comp)
    return n_comp, remap[raw]


def extract_pattern(mesh, adjacency, corner_field, tau, provenance=None):
    """Break every interior face whose jump norm exceeds tau; pieces are the
    face-connected components of the remaining adjacency."""
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    jn = _face_jump_norms(mesh, adjacency, corner_field)
    n_comp, labels = labels_from_broken(mesh.m, adjacency, jn > tau)
    return FracturePattern(
        labels=labels, piece_count=n_comp, tau=float(tau), provenance=provenance or {}
    )


def generate_fractures(mesh, adjacency, dops, fmodes, cfg, rng):
    """The per-shape generation loop: one pattern per mode at the midpoint
    threshold, then random impacts with randomized thresholds, rejecting
    patterns whose piece count falls outside cfg.piece_bounds.

    Fully deterministic given the rng state. Raises UnfracturableError if a
    mode pattern violates the bounds or an impact exhausts max_attempts.
    """
    from .geom import boundary_vertex_ids

    lo, hi = cfg.piece_bounds
    tau_mid = 0.5 * (cfg.tau_range[0] + cfg.tau_range[1])
    patterns = []
    for r in range(fmodes.k):
        pat = extract_pattern(
            mesh, adjacency, fmodes.vectors[:, r], tau_mid,
            provenance={"kind": "mode", "mode_index": r},
        )
        if not lo <= pat.piece_count <= hi:
            raise UnfracturableError(
                f"mode {r} pattern has {pat.piece_count} pieces, outside [{lo}, {hi}]"
            )
        patterns.append(pat)

    boundary_ids = boundary_vertex_ids(mesh)
    for i in range(cfg.n_impacts):
        for attempt in range(cfg.max_attempts):
            tau = float(rng.uniform(cfg.tau_range[0], cfg.tau_range[1]))
            w, impact_info = sample_impact(mesh, rng, cfg, boundary_ids)
            w_star = project_impact(fmodes, dops.mass, w)
            pat = extract_pattern(
                mesh, adjacency, w_star, tau,
                provenance={"kind": "impact", "index": i, "attempt": attempt, **impact_info},
            )
            if lo <= pat.piece_count <= hi:
                patterns.append(pat)
                break
        else:
            raise UnfracturableError(
                f"impact {i}: no valid pattern within {cfg.max_attempts} attempts"
            )
    return patterns
