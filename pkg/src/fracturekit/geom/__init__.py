"""Mesh ingestion, normalization, cages, tetrahedralization, and piece surfaces."""

from .meshio import (
    MeshParseError,
    fix_tet_orientation,
    load_surface_mesh,
    load_tet_mesh,
    obj_text,
    save_obj_groups,
    save_surface_mesh,
)
from .sdf import ScalarGrid, extract_cage, voxelize_sdf
from .surface import (
    BoxTransform,
    MeshError,
    SurfaceMesh,
    bounding_box,
    face_areas,
    face_normals,
    is_watertight,
    normalize_to_unit_box,
    signed_volume,
)
from .tet import (
    TET_FACES,
    FaceAdjacency,
    TetMesh,
    boundary_vertex_ids,
    extract_piece_surfaces,
    tet_adjacency,
    tet_component_labels,
    tet_volumes,
    tetrahedralize_voxels,
)

__all__ = [
    "BoxTransform",
    "FaceAdjacency",
    "MeshError",
    "MeshParseError",
    "ScalarGrid",
    "SurfaceMesh",
    "TET_FACES",
    "TetMesh",
    "bounding_box",
    "boundary_vertex_ids",
    "extract_cage",
    "extract_piece_surfaces",
    "face_areas",
    "face_normals",
    "fix_tet_orientation",
    "is_watertight",
    "load_surface_mesh",
    "load_tet_mesh",
    "normalize_to_unit_box",
    "obj_text",
    "save_obj_groups",
    "save_surface_mesh",
    "signed_volume",
    "tet_adjacency",
    "tet_component_labels",
    "tet_volumes",
    "tetrahedralize_voxels",
    "voxelize_sdf",
]
