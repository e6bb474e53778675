"""
Boundary edge splitting and its inverse collapse, the body-fitting primitives.
"""
import logging
import math
import numpy as np
from mesh2d.mesh import Mesh2D, signed_areas
from utils.constants import DEGENERATE_AREA_FACTOR, MIN_ANGLE_DEG
from utils.errors import GeometryError, ValidationError
from utils.validators import validate_open_unit

logger = logging.getLogger(__name__)


def min_angle_deg(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Smallest interior angle of each triangle, in degrees."""
    p = vertices[triangles]
    angles = []
    for k in range(3):
        u = p[:, (k + 1) % 3] - p[:, k]
        v = p[:, (k + 2) % 3] - p[:, k]
        cos = (u * v).sum(axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        angles.append(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))
    return np.min(angles, axis=0)


def split_boundary_edge(mesh: Mesh2D, edge: int, t: float) -> Mesh2D:
    """
    Insert a vertex on a boundary edge and split the owning triangle in two.

    The new vertex gets index mesh.n_vertices; the split edge keeps its id
    for the first half and the second half is inserted right after it, so
    loop order, labels and arclength stay consistent.

    Args:
        mesh: mesh to split
        edge: boundary edge id
        t: position along the edge, strictly inside (0, 1)

    Returns:
        New Mesh2D

    Raises:
        ValidationError: If t is outside (0, 1) or the edge does not exist
        GeometryError: If a resulting triangle is degenerate
    """
    t = validate_open_unit(t, "t")
    if not 0 <= edge < mesh.n_boundary_edges:
        raise ValidationError(f"Boundary edge {edge} does not exist", "edge")

    a, b = (int(v) for v in mesh.boundary_edges[edge])
    owner = int(mesh.edge_triangle[edge])
    tri = [int(v) for v in mesh.triangles[owner]]
    c = next(v for v in tri if v != a and v != b)

    point = mesh.vertices[a] + t * (mesh.vertices[b] - mesh.vertices[a])
    m = mesh.n_vertices
    vertices = np.vstack([mesh.vertices, point])

    new_pair = np.array([[a, m, c], [m, b, c]], dtype=np.int64)
    areas = signed_areas(vertices, new_pair)
    if np.any(areas <= DEGENERATE_AREA_FACTOR * mesh.h ** 2):
        raise GeometryError(f"Splitting edge {edge} at t={t:.3e} creates a degenerate triangle")

    quality = float(min_angle_deg(vertices, new_pair).min())
    if quality < MIN_ANGLE_DEG:
        logger.debug(f"Split of edge {edge} at t={t:.3f} has min angle {quality:.1f} deg")

    triangles = np.vstack([mesh.triangles, new_pair[1:]])
    triangles[owner] = new_pair[0]

    edges = np.insert(mesh.boundary_edges, edge + 1, [m, b], axis=0)
    edges[edge] = [a, m]
    labels = np.insert(mesh.edge_labels, edge + 1, mesh.edge_labels[edge])
    loops = np.insert(mesh.edge_loops, edge + 1, mesh.edge_loops[edge])

    return Mesh2D(vertices, triangles, edges, labels, loops)


def split_quality(mesh: Mesh2D, edge: int, t: float) -> float:
    """Min angle (degrees) the two triangles would have after splitting edge at t."""
    a, b = (int(v) for v in mesh.boundary_edges[edge])
    tri = [int(v) for v in mesh.triangles[int(mesh.edge_triangle[edge])]]
    c = next(v for v in tri if v != a and v != b)
    point = mesh.vertices[a] + t * (mesh.vertices[b] - mesh.vertices[a])
    vertices = np.vstack([mesh.vertices[[a, b, c]], point])
    angles = min_angle_deg(vertices, np.array([[0, 3, 2], [3, 1, 2]]))
    return float(angles.min()) if np.all(np.isfinite(angles)) else -math.inf


def collapse_boundary_vertex(mesh: Mesh2D, vertex: int) -> Mesh2D:
    """
    Undo split_boundary_edge: merge the two boundary edges at vertex and its two triangles.

    Vertices after the removed one shift down by one index.

    Raises:
        GeometryError: If vertex is not a boundary vertex created by a single split
    """
    vertex = int(vertex)
    incoming = np.flatnonzero(mesh.boundary_edges[:, 1] == vertex)
    outgoing = np.flatnonzero(mesh.boundary_edges[:, 0] == vertex)
    if len(incoming) != 1 or len(outgoing) != 1 or outgoing[0] != incoming[0] + 1:
        raise GeometryError(f"Vertex {vertex} does not split a boundary edge")
    edge = int(incoming[0])
    a, b = int(mesh.boundary_edges[edge, 0]), int(mesh.boundary_edges[edge + 1, 1])

    owners = np.flatnonzero(np.any(mesh.triangles == vertex, axis=1))
    if len(owners) != 2:
        raise GeometryError(f"Vertex {vertex} belongs to {len(owners)} triangles, expected 2")
    first, second = (set(int(v) for v in mesh.triangles[k]) for k in owners)
    keep, drop = (owners[0], owners[1]) if a in first else (owners[1], owners[0])
    apex = (first & second) - {vertex}
    if len(apex) != 1 or a not in first | second or b not in first | second or {a, b} & apex:
        raise GeometryError(f"Vertex {vertex} was not created by a single split")

    triangles = mesh.triangles.copy()
    triangles[keep] = np.where(triangles[keep] == vertex, b, triangles[keep])
    triangles = np.delete(triangles, drop, axis=0)
    triangles = triangles - (triangles > vertex)

    edges = np.delete(mesh.boundary_edges, edge + 1, axis=0)
    edges[edge] = [a, b]
    edges = edges - (edges > vertex)

    return Mesh2D(
        np.delete(mesh.vertices, vertex, axis=0),
        triangles,
        edges,
        np.delete(mesh.edge_labels, edge + 1),
        np.delete(mesh.edge_loops, edge + 1),
    )
