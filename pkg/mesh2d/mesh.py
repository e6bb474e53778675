"""
Triangle meshes of 2D domains and flat triangulations of the unit disk.
Meshes are immutable: every editing operation returns a new instance.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Tuple
import numpy as np
from utils.constants import DEGENERATE_AREA_FACTOR
from utils.errors import GeometryError

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Signed area of every triangle (positive for counter-clockwise)."""
    p0 = vertices[triangles[:, 0]]
    e1 = vertices[triangles[:, 1]] - p0
    e2 = vertices[triangles[:, 2]] - p0
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def orient_ccw(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Return triangles reordered so that every signed area is positive."""
    triangles = np.array(triangles, dtype=np.int64, copy=True)
    flip = signed_areas(vertices, triangles) < 0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    return triangles


def boundary_loops(triangles: np.ndarray, start_vertices: Tuple[int, ...] = ()) -> List[np.ndarray]:
    """
    Chain the edges used by exactly one triangle into closed loops.

    Edges keep the orientation they have inside their counter-clockwise
    triangle, so the domain lies to the left of every loop.

    Args:
        triangles: (m, 3) counter-clockwise triangles
        start_vertices: preferred first vertex of each loop, in order

    Returns:
        List of (b_k, 2) arrays of directed edges, one per loop

    Raises:
        GeometryError: If the boundary is not a union of closed loops
    """
    directed = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    undirected = np.sort(directed, axis=1)
    _, inverse, counts = np.unique(undirected, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    if np.any(counts > 2):
        raise GeometryError("Non-manifold mesh: an edge is shared by more than two triangles")
    boundary = directed[counts[inverse] == 1]

    successor = {}
    for a, b in boundary:
        if int(a) in successor:
            raise GeometryError(f"Boundary vertex {a} starts two boundary edges")
        successor[int(a)] = int(b)

    loops = []
    preferred = [v for v in start_vertices if v in successor]
    while successor:
        start = preferred.pop(0) if preferred else min(successor)
        if start not in successor:
            continue
        loop = []
        current = start
        while True:
            nxt = successor.pop(current, None)
            if nxt is None:
                raise GeometryError(f"Boundary loop through vertex {start} does not close")
            loop.append((current, nxt))
            current = nxt
            if current == start:
                break
        loops.append(np.array(loop, dtype=np.int64))
    return loops


@dataclass(frozen=True, eq=False)
class Mesh2D:
    """
    Conforming triangle mesh with an ordered, labeled boundary.

    Boundary edges of loop 0 come first, then loop 1, and so on; inside a
    loop edge i ends where edge i+1 starts and the last edge closes the loop.
    Label 0 marks the optimizable boundary, labels >= 1 fixed regions.
    """
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    edge_labels: np.ndarray
    edge_loops: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", _frozen(self.vertices, float))
        object.__setattr__(self, "triangles", _frozen(self.triangles, np.int64))
        object.__setattr__(self, "boundary_edges", _frozen(self.boundary_edges, np.int64))
        object.__setattr__(self, "edge_labels", _frozen(self.edge_labels, np.int64))
        object.__setattr__(self, "edge_loops", _frozen(self.edge_loops, np.int64))

    @classmethod
    def from_loops(cls, vertices: np.ndarray, triangles: np.ndarray,
                   loops: List[np.ndarray], labels: List[np.ndarray] = None) -> "Mesh2D":
        """Build a mesh from per-loop edge arrays (and optional per-loop labels)."""
        edges = np.concatenate(loops) if loops else np.zeros((0, 2), dtype=np.int64)
        loop_ids = np.concatenate([np.full(len(loop), k) for k, loop in enumerate(loops)])
        if labels is None:
            edge_labels = np.zeros(len(edges), dtype=np.int64)
        else:
            edge_labels = np.concatenate(labels)
        return cls(vertices, triangles, edges, edge_labels, loop_ids)

    # ==================== SIZES ====================

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_boundary_edges(self) -> int:
        return len(self.boundary_edges)

    @property
    def n_loops(self) -> int:
        return int(self.edge_loops.max()) + 1 if len(self.edge_loops) else 0

    # ==================== GEOMETRY ====================

    @cached_property
    def areas(self) -> np.ndarray:
        return signed_areas(self.vertices, self.triangles)

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted vertex pairs."""
        t = self.triangles
        pairs = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
        return np.unique(pairs, axis=0)

    @cached_property
    def h(self) -> float:
        """Maximum edge length."""
        vec = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return float(np.sqrt((vec ** 2).sum(axis=1)).max())

    @cached_property
    def diameter(self) -> float:
        span = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(np.hypot(span[0], span[1]))

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        vec = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        return np.sqrt((vec ** 2).sum(axis=1))

    @cached_property
    def edge_normals(self) -> np.ndarray:
        """Outward unit normals (the domain lies left of each directed edge)."""
        vec = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        tangent = vec / self.edge_lengths[:, None]
        return np.column_stack([tangent[:, 1], -tangent[:, 0]])

    @cached_property
    def edge_midpoints(self) -> np.ndarray:
        return 0.5 * (self.vertices[self.boundary_edges[:, 0]] + self.vertices[self.boundary_edges[:, 1]])

    @cached_property
    def edge_triangle(self) -> np.ndarray:
        """Index of the triangle owning each boundary edge."""
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        owner = np.tile(np.arange(len(t)), 3)
        n = np.int64(self.n_vertices)
        keys = directed[:, 0] * n + directed[:, 1]
        order = np.argsort(keys)
        wanted = self.boundary_edges[:, 0] * n + self.boundary_edges[:, 1]
        pos = np.searchsorted(keys[order], wanted)
        pos = np.minimum(pos, len(keys) - 1)
        found = keys[order][pos] == wanted
        if not np.all(found):
            raise GeometryError("Boundary edge not found in any triangle with matching orientation")
        return owner[order][pos]

    @cached_property
    def arclength(self) -> np.ndarray:
        """Arclength of the start vertex of every boundary edge, measured within its loop."""
        s = np.zeros(self.n_boundary_edges)
        for loop in range(self.n_loops):
            ids = self.loop_edge_ids(loop)
            lengths = self.edge_lengths[ids]
            s[ids] = np.concatenate([[0.0], np.cumsum(lengths[:-1])])
        return s

    def polygon_area(self) -> float:
        """Shoelace area enclosed by the boundary loops (holes count negative)."""
        a = self.vertices[self.boundary_edges[:, 0]]
        b = self.vertices[self.boundary_edges[:, 1]]
        return float(0.5 * np.sum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1]))

    # ==================== LOOPS ====================

    def loop_edge_ids(self, loop: int = 0) -> np.ndarray:
        return np.flatnonzero(self.edge_loops == loop)

    def loop_vertices(self, loop: int = 0) -> np.ndarray:
        """Vertices of a loop in traversal order (start vertex of each edge)."""
        return self.boundary_edges[self.loop_edge_ids(loop), 0]

    def loop_arclength(self, loop: int = 0) -> np.ndarray:
        return self.arclength[self.loop_edge_ids(loop)]

    def loop_perimeter(self, loop: int = 0) -> float:
        return float(self.edge_lengths[self.loop_edge_ids(loop)].sum())

    def loop_vertex_labels(self, loop: int = 0) -> np.ndarray:
        """
        Per loop vertex: the smaller label of its two incident edges.

        A vertex is optimizable (0) if either incident edge is.
        """
        ids = self.loop_edge_ids(loop)
        own = self.edge_labels[ids]
        previous = np.roll(own, 1)
        return np.minimum(own, previous)

    def point_on_loop(self, s: float, loop: int = 0) -> Tuple[int, float, np.ndarray]:
        """
        Locate arclength s on a loop.

        Returns:
            (boundary edge id, fraction t along the edge, point)
        """
        ids = self.loop_edge_ids(loop)
        perimeter = self.loop_perimeter(loop)
        s = float(s) % perimeter
        starts = self.arclength[ids]
        k = int(np.searchsorted(starts, s, side="right") - 1)
        k = min(max(k, 0), len(ids) - 1)
        edge = int(ids[k])
        t = (s - starts[k]) / self.edge_lengths[edge]
        t = min(max(t, 0.0), 1.0)
        a, b = self.vertices[self.boundary_edges[edge]]
        return edge, t, a + t * (b - a)

    def with_labels(self, labels: np.ndarray) -> "Mesh2D":
        """Return the same mesh with new boundary edge labels."""
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (self.n_boundary_edges,):
            raise GeometryError(f"Expected {self.n_boundary_edges} labels, got {labels.shape}")
        return Mesh2D(self.vertices, self.triangles, self.boundary_edges, labels, self.edge_loops)

    # ==================== AUDIT ====================

    def audit(self) -> None:
        """
        Check every mesh invariant.

        Raises:
            GeometryError: On the first violated invariant
        """
        if np.any(self.areas <= DEGENERATE_AREA_FACTOR * self.h ** 2):
            bad = int(np.argmin(self.areas))
            raise GeometryError(f"Triangle {bad} has non-positive area {self.areas[bad]:.3e}")

        t = self.triangles
        pairs = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
        unique, counts = np.unique(pairs, axis=0, return_counts=True)
        if np.any(counts > 2):
            raise GeometryError("Edge shared by more than two triangles")
        single = {tuple(e) for e in unique[counts == 1]}
        declared = {tuple(sorted(e)) for e in self.boundary_edges.tolist()}
        if single != declared:
            raise GeometryError(
                f"Boundary mismatch: {len(single - declared)} undeclared open edges, "
                f"{len(declared - single)} declared edges not on the boundary"
            )
        used = np.unique(t)
        if len(used) != self.n_vertices:
            raise GeometryError("Mesh has vertices not used by any triangle")

        for loop in range(self.n_loops):
            ids = self.loop_edge_ids(loop)
            if len(ids) < 3:
                raise GeometryError(f"Loop {loop} has fewer than 3 edges")
            edges = self.boundary_edges[ids]
            if not np.array_equal(edges[:, 1], np.roll(edges[:, 0], -1)):
                raise GeometryError(f"Loop {loop} is not a closed ordered chain")
            if np.any(self.edge_lengths[ids] <= 0):
                raise GeometryError(f"Loop {loop} has zero-length edges")
        # orientation: raises if an edge is not found with the stored direction
        _ = self.edge_triangle


@dataclass(frozen=True, eq=False)
class DiskSurfaceMesh:
    """Flat triangulation of the unit disk embedded in the plane z = 0."""
    vertices: np.ndarray
    triangles: np.ndarray
    n_rings: int = 0

    def __post_init__(self):
        object.__setattr__(self, "vertices", _frozen(self.vertices, float))
        object.__setattr__(self, "triangles", _frozen(self.triangles, np.int64))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def areas(self) -> np.ndarray:
        return signed_areas(self.vertices, self.triangles)

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    @cached_property
    def h(self) -> float:
        t = self.triangles
        pairs = np.unique(np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1), axis=0)
        vec = self.vertices[pairs[:, 1]] - self.vertices[pairs[:, 0]]
        return float(np.sqrt((vec ** 2).sum(axis=1)).max())

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        loops = boundary_loops(self.triangles)
        return np.concatenate([loop[:, 0] for loop in loops])

    def audit(self) -> None:
        """Check disk-mesh invariants; raises GeometryError."""
        radii = np.hypot(self.vertices[:, 0], self.vertices[:, 1])
        if np.any(radii > 1.0 + 1e-12):
            raise GeometryError("Screen vertex outside the unit disk")
        if np.any(np.abs(radii[self.boundary_vertices] - 1.0) > 1e-10):
            raise GeometryError("Screen boundary vertex off the unit circle")
        if np.any(self.areas <= DEGENERATE_AREA_FACTOR * self.h ** 2):
            raise GeometryError("Screen triangle with non-positive area")
