"""Numeric hot kernels: compiled extension core with a pure-Python fallback.

The compiled backend (``fracturekit.kernels._native``) is selected at import
when available. Set ``FRACTUREKIT_BACKEND=python`` to force the NumPy
fallback, or ``FRACTUREKIT_BACKEND=native`` to fail loudly if the extension
is missing. ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

from . import reference as _reference

_requested = os.environ.get("FRACTUREKIT_BACKEND", "").strip().lower()
if _requested not in ("", "native", "python"):
    raise ValueError(f"FRACTUREKIT_BACKEND must be 'native' or 'python', got {_requested!r}")

_impl = None
if _requested in ("", "native"):
    try:
        from . import _native as _impl
    except ImportError:
        if _requested == "native":
            raise
        _impl = None
if _impl is None:
    _impl = _reference

BACKEND = _impl.BACKEND_NAME

point_triangle_sq_distance = _reference.point_triangle_sq_distance
point_mesh_sq_distance = _impl.point_mesh_sq_distance
grid_inside_mask = _impl.grid_inside_mask
points_inside_mesh = _impl.points_inside_mesh
nearest_sq_dists = _impl.nearest_sq_dists
segment_mesh_crossings = _impl.segment_mesh_crossings


def get_backends():
    """Return {name: module} for every importable backend."""
    backends = {"python": _reference}
    try:
        from . import _native
        backends["native"] = _native
    except ImportError:
        pass
    return backends
