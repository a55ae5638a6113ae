"""fracturekit: physically based brittle fracture of 3D solids via
precomputed fracture modes, fractured-shape dataset generation with a
lossless compressed archive format, and shape-reassembly evaluation."""

from . import evalkit, fem, fracture, geom, kernels, modes, segpack, stats

__version__ = "0.1.0"

__all__ = [
    "evalkit",
    "fem",
    "fracture",
    "geom",
    "kernels",
    "modes",
    "segpack",
    "stats",
]
