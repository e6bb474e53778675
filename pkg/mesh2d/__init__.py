"""
Triangle meshes of 2D domains, the screen disk, and boundary edge splitting.
"""
from .mesh import Mesh2D, DiskSurfaceMesh, boundary_loops, orient_ccw, signed_areas
from .generators import (
    gen_disk_domain, gen_square_domain, gen_screen_disk, n_rings_for_h, disk_arc_labels
)
from .editing import collapse_boundary_vertex, split_boundary_edge, split_quality, min_angle_deg

__all__ = [
    "Mesh2D", "DiskSurfaceMesh", "boundary_loops", "orient_ccw", "signed_areas",
    "gen_disk_domain", "gen_square_domain", "gen_screen_disk", "n_rings_for_h", "disk_arc_labels",
    "collapse_boundary_vertex", "split_boundary_edge", "split_quality", "min_angle_deg",
]
