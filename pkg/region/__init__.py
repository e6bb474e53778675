"""
Boundary regions as level sets on a boundary loop: distance, transport, insertion and body fitting.
"""
from .levelset import (
    BoundaryLevelSet, InterfacePoint, circular_distance, signed_distance, distance_to_region,
    extract_interface, redistance, area, cont, arcs_to_levelset, transfer, empty_region
)
from .evolution import (
    advect, extend_velocity, descent_velocity, insert_disk, mask_fixed, admissible_vertices
)
from .fitting import FittedRegion, fit_mesh_to_region

__all__ = [
    "BoundaryLevelSet", "InterfacePoint", "circular_distance", "signed_distance", "distance_to_region",
    "extract_interface", "redistance", "area", "cont", "arcs_to_levelset", "transfer", "empty_region",
    "advect", "extend_velocity", "descent_velocity", "insert_disk", "mask_fixed", "admissible_vertices",
    "FittedRegion", "fit_mesh_to_region",
]
