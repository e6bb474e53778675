"""
Body fitting: make every interface point a mesh vertex and tag boundary edges.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Set, Tuple
import numpy as np
from mesh2d.editing import collapse_boundary_vertex, split_boundary_edge, split_quality
from mesh2d.mesh import Mesh2D
from region.levelset import (
    BoundaryLevelSet, InterfacePoint, distance_to_region, extract_interface, signed_distance
)
from utils.constants import MIN_ANGLE_DEG, SNAP_FRACTION
from utils.errors import GeometryError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FittedRegion:
    """A mesh whose vertices include every interface point, plus per-edge region tags."""
    mesh: Mesh2D
    interface: List[InterfacePoint]
    tags: np.ndarray
    levelset: BoundaryLevelSet


def _place(mesh: Mesh2D, edge: int, t: float) -> Tuple[Mesh2D, int]:
    """Snap to an edge end or split the edge."""
    if t <= SNAP_FRACTION:
        return mesh, int(mesh.boundary_edges[edge, 0])
    if 1.0 - t <= SNAP_FRACTION:
        return mesh, int(mesh.boundary_edges[edge, 1])
    mesh = split_boundary_edge(mesh, edge, t)
    return mesh, mesh.n_vertices - 1


def _stale_vertex(mesh: Mesh2D, edge: int, t: float, base_vertices: int, used: Set[int]) -> Optional[int]:
    """An earlier inserted end of edge that a split at t would leave below the angle threshold."""
    if t <= SNAP_FRACTION or 1.0 - t <= SNAP_FRACTION:
        return None
    ends = [int(v) for v in mesh.boundary_edges[edge]]
    candidates = [v for v in (ends[::-1] if t > 0.5 else ends) if v >= base_vertices and v not in used]
    if not candidates or split_quality(mesh, edge, t) >= MIN_ANGLE_DEG:
        return None
    return candidates[0]


def fit_mesh_to_region(mesh: Mesh2D, ls: BoundaryLevelSet, base_vertices: int = None) -> FittedRegion:
    """
    Split boundary edges at interface points and tag edges inside G.

    Points within 0.25 edge lengths of an existing vertex are snapped to it;
    two points snapping onto the same vertex cancel. When mesh was itself
    fitted earlier, vertices from base_vertices on are interface vertices
    of that fitting: one that is not reused and would leave a split angle
    below MIN_ANGLE_DEG is collapsed before the edge is re-split. Vertices
    below base_vertices (all input vertices by default) keep their
    indices, new vertices are appended.

    Returns:
        FittedRegion with tags[e] True for boundary edges of G

    Raises:
        GeometryError: Propagated from split_boundary_edge
    """
    ls.check_mesh(mesh)
    loop = ls.loop_ref
    interface = extract_interface(ls, mesh)
    base_vertices = mesh.n_vertices if base_vertices is None else int(base_vertices)

    snapped = []
    for point in sorted(interface, key=lambda p: p.s, reverse=True):
        edge, t, _ = mesh.point_on_loop(point.s, loop)
        stale = _stale_vertex(mesh, edge, t, base_vertices, {v for v, _ in snapped})
        if stale is not None:
            try:
                mesh = collapse_boundary_vertex(mesh, stale)
            except GeometryError as e:
                logger.debug(f"Keeping vertex {stale}: {e}")
            else:
                snapped = [(v - (v > stale), sign) for v, sign in snapped]
                logger.debug(f"Collapsed vertex {stale} before splitting at s={point.s:.4f}")
                edge, t, _ = mesh.point_on_loop(point.s, loop)
        mesh, vertex = _place(mesh, edge, t)
        snapped.append((vertex, point.conormal_sign))

    # arclength of each snapped vertex on the fitted loop
    loop_vertices = mesh.loop_vertices(loop)
    position = {int(v): k for k, v in enumerate(loop_vertices)}
    s_loop = mesh.loop_arclength(loop)
    fitted = sorted(((float(s_loop[position[v]]), v, sign) for v, sign in snapped), key=lambda x: x[0])

    # cancel pairs collapsed onto one vertex
    kept = []
    for item in fitted:
        if kept and kept[-1][1] == item[1] and kept[-1][2] != item[2]:
            kept.pop()
            continue
        kept.append(item)
    if len(kept) >= 2 and kept[0][1] == kept[-1][1] and kept[0][2] != kept[-1][2]:
        kept = kept[1:-1]

    points = [
        InterfacePoint(s, (float(mesh.vertices[v, 0]), float(mesh.vertices[v, 1])), sign)
        for s, v, sign in kept
    ]
    empty_inside = not points and bool(np.all(ls.phi < 0))
    fitted_ls = distance_to_region(mesh, points, loop, empty_inside=empty_inside)

    tags = np.zeros(mesh.n_boundary_edges, dtype=bool)
    ids = mesh.loop_edge_ids(loop)
    s_mid = mesh.arclength[ids] + 0.5 * mesh.edge_lengths[ids]
    empty_sign = -1.0 if empty_inside else 1.0
    tags[ids] = signed_distance(s_mid, fitted_ls.perimeter, points, empty_sign) < 0

    if len(points) != len(interface):
        logger.debug(f"Fitting snapped {len(interface) - len(points)} interface points away")
    return FittedRegion(mesh, points, tags, fitted_ls)
