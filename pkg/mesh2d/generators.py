"""
Mesh generators: disk and square domains, and the concentric-ring screen disk.
"""
import logging
import math
from typing import Callable, Optional, Sequence, Tuple
import numpy as np
from scipy.spatial import Delaunay
from mesh2d.mesh import DiskSurfaceMesh, Mesh2D, boundary_loops, orient_ccw, signed_areas
from utils.constants import DEGENERATE_AREA_FACTOR, LABEL_OPTIMIZABLE, SQUARE_SIDE_LABELS
from utils.errors import GeometryError, ValidationError
from utils.validators import validate_count, validate_positive

logger = logging.getLogger(__name__)

LabelFunction = Callable[[np.ndarray], np.ndarray]


def _graded_offsets(h_min: float, outer: float, grading: float) -> np.ndarray:
    """Geometric offsets outer, outer/q, outer/q^2, ... down to h_min."""
    offsets = [outer]
    while offsets[-1] / grading > h_min:
        offsets.append(offsets[-1] / grading)
    return np.array(offsets)


def gen_disk_domain(
    radius: float,
    n_boundary: int,
    target_h: float,
    focus_angle: Optional[float] = None,
    h_min: Optional[float] = None,
    grading: float = 1.3,
    exact_arcs: Sequence[float] = (),
    label_fn: Optional[LabelFunction] = None,
) -> Mesh2D:
    """
    Triangulate the disk of given radius centred at the origin.

    Interior points sit on concentric rings spaced about target_h apart and
    are connected by a Delaunay triangulation, which for points in convex
    position reproduces the boundary polygon exactly. With focus_angle the
    boundary and interior are graded geometrically towards the boundary
    point at that angle down to size h_min; exact_arcs lists arclength
    offsets from the focus that must be boundary vertices.

    Args:
        radius: disk radius
        n_boundary: number of uniformly spaced boundary vertices
        target_h: interior mesh size
        focus_angle: optional angle of the grading centre
        h_min: smallest mesh size at the focus
        grading: growth ratio between consecutive graded layers
        exact_arcs: arclength offsets placed exactly on the boundary
        label_fn: maps (b, 2) edge midpoints to integer labels (default all 0)

    Returns:
        Mesh2D with one boundary loop starting at angle 0 (or at the focus)

    Raises:
        ValidationError: On invalid parameters
    """
    radius = validate_positive(radius, "radius")
    n_boundary = validate_count(n_boundary, "n_boundary", minimum=8)
    target_h = validate_positive(target_h, "target_h")
    if target_h > radius:
        raise ValidationError("target_h must not exceed the radius", "target_h")

    angles = 2.0 * math.pi * np.arange(n_boundary) / n_boundary
    spacing_b = 2.0 * math.pi * radius / n_boundary

    focus_point = None
    graded_rings = np.zeros(0)
    if focus_angle is not None:
        h_min = validate_positive(h_min if h_min is not None else target_h / 8, "h_min")
        if grading <= 1.0:
            raise ValidationError("grading must exceed 1", "grading")
        outer = min(target_h * grading / (grading - 1.0), 0.25 * math.pi * radius)
        graded_rings = _graded_offsets(h_min, outer, grading)
        offsets = graded_rings.copy()
        for arc in exact_arcs:
            arc = validate_positive(arc, "exact_arcs")
            local = max(h_min, arc * (1.0 - 1.0 / grading))
            offsets = offsets[np.abs(offsets - arc) > 0.3 * local]
        offsets = np.concatenate([offsets, np.asarray(exact_arcs, dtype=float)])
        zone = outer + 0.5 * spacing_b
        delta = np.angle(np.exp(1j * (angles - focus_angle)))
        angles = angles[np.abs(delta) * radius > zone]
        graded = focus_angle + np.concatenate([[0.0], offsets, -offsets]) / radius
        angles = np.concatenate([angles, graded])
        focus_point = radius * np.array([math.cos(focus_angle), math.sin(focus_angle)])

    start_angle = 0.0 if focus_angle is None else focus_angle
    angles = np.sort(np.mod(angles - start_angle, 2.0 * math.pi)) + start_angle
    boundary = radius * np.column_stack([np.cos(angles), np.sin(angles)])

    # concentric rings, offset by half a step on odd rings
    interior = [np.zeros((1, 2))]
    dr = target_h * math.sqrt(3.0) / 2.0
    r = radius - 0.5 * (spacing_b + target_h) * math.sqrt(3.0) / 2.0
    k = 0
    while r > 0.5 * target_h:
        count = max(6, int(round(2.0 * math.pi * r / target_h)))
        theta = 2.0 * math.pi * (np.arange(count) + 0.5 * (k % 2)) / count
        interior.append(r * np.column_stack([np.cos(theta), np.sin(theta)]))
        r -= dr
        k += 1
    interior = np.concatenate(interior)

    if focus_point is not None:
        keep = np.hypot(*(interior - focus_point).T) > graded_rings[0] + 0.5 * target_h
        interior = interior[keep]
        inward = focus_angle + math.pi
        layers = []
        for j, rho in enumerate(graded_rings):
            local = rho * (1.0 - 1.0 / grading)
            count = max(3, int(round(math.pi * rho / local)))
            beta = -0.5 * math.pi + math.pi * (np.arange(count) + 0.5 + 0.25 * (j % 2)) / count
            pts = focus_point + rho * np.column_stack([np.cos(inward + beta), np.sin(inward + beta)])
            margin = radius - np.hypot(pts[:, 0], pts[:, 1])
            layers.append(pts[margin > 0.25 * local])
        interior = np.concatenate([interior] + layers)

    points = np.concatenate([boundary, interior])
    triangles = orient_ccw(points, Delaunay(points).simplices)
    areas = signed_areas(points, triangles)
    scale = max(target_h, spacing_b)
    triangles = triangles[areas > DEGENERATE_AREA_FACTOR * scale ** 2]

    loops = boundary_loops(triangles, start_vertices=(0,))
    if len(loops) != 1 or len(loops[0]) != len(boundary):
        raise GeometryError("Disk triangulation did not reproduce the boundary polygon")

    mesh = Mesh2D.from_loops(points, triangles, loops)
    if label_fn is not None:
        mesh = mesh.with_labels(np.asarray(label_fn(mesh.edge_midpoints), dtype=np.int64))
    logger.debug(f"Disk mesh: {mesh.n_vertices} vertices, {mesh.n_triangles} triangles, h={mesh.h:.4g}")
    return mesh


def gen_square_domain(
    side: float,
    target_h: float,
    side_labels: Tuple[int, int, int, int] = SQUARE_SIDE_LABELS,
) -> Mesh2D:
    """
    Structured triangulation of [0, side]^2, two triangles per grid cell.

    The boundary loop runs counter-clockwise from the origin; edges carry
    side_labels in the order bottom, right, top, left.

    Raises:
        ValidationError: On invalid parameters
    """
    side = validate_positive(side, "side")
    target_h = validate_positive(target_h, "target_h")
    if target_h > side:
        raise ValidationError("target_h must not exceed the side", "target_h")
    if len(side_labels) != 4:
        raise ValidationError("side_labels needs four entries", "side_labels")

    n = max(1, int(math.ceil(side / target_h - 1e-12)))
    coords = side * np.arange(n + 1) / n
    xx, yy = np.meshgrid(coords, coords, indexing="xy")
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    i, j = i.ravel(), j.ravel()
    v00, v10, v11, v01 = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
    triangles = np.concatenate([
        np.column_stack([v00, v10, v11]),
        np.column_stack([v00, v11, v01]),
    ])

    r = np.arange(n)
    sides = [
        np.column_stack([vid(r, 0), vid(r + 1, 0)]),
        np.column_stack([vid(n, r), vid(n, r + 1)]),
        np.column_stack([vid(n - r, n), vid(n - r - 1, n)]),
        np.column_stack([vid(0, n - r), vid(0, n - r - 1)]),
    ]
    labels = [np.full(n, side_labels[k], dtype=np.int64) for k in range(4)]
    mesh = Mesh2D.from_loops(vertices, triangles, [np.concatenate(sides)], [np.concatenate(labels)])
    logger.debug(f"Square mesh: {n}x{n} cells, {mesh.n_triangles} triangles")
    return mesh


def gen_screen_disk(n_rings: int) -> DiskSurfaceMesh:
    """
    Concentric-ring triangulation of the unit disk.

    Ring r (1..n_rings) has radius r/n_rings and 6r vertices; between two
    rings each of the six sectors holds 2r - 1 triangles, giving 6 n^2
    triangles and 1 + 3n(n+1) vertices. The layout is invariant under
    rotation by 60 degrees and reflection in the x axis.

    Raises:
        ValidationError: If n_rings < 1
    """
    n_rings = validate_count(n_rings, "n_rings", minimum=1)

    vertices = [np.zeros((1, 2))]
    ring_start = [0]
    offset = 1
    for r in range(1, n_rings + 1):
        theta = 2.0 * math.pi * np.arange(6 * r) / (6 * r)
        vertices.append((r / n_rings) * np.column_stack([np.cos(theta), np.sin(theta)]))
        ring_start.append(offset)
        offset += 6 * r
    vertices = np.concatenate(vertices)

    triangles = []
    for r in range(1, n_rings + 1):
        outer_count, inner_count = 6 * r, max(6 * (r - 1), 1)
        for sector in range(6):
            def outer(t):
                return ring_start[r] + (sector * r + t) % outer_count

            def inner(t):
                if r == 1:
                    return 0
                return ring_start[r - 1] + (sector * (r - 1) + t) % inner_count

            for t in range(r):
                triangles.append((outer(t), outer(t + 1), inner(t)))
            for t in range(r - 1):
                triangles.append((inner(t), outer(t + 1), inner(t + 1)))

    triangles = orient_ccw(vertices, np.array(triangles, dtype=np.int64))
    mesh = DiskSurfaceMesh(vertices, triangles, n_rings)
    logger.debug(f"Screen disk: {n_rings} rings, {mesh.n_vertices} vertices, h={mesh.h:.4g}")
    return mesh


def n_rings_for_h(h: float) -> int:
    """Ring count whose mesh size is closest to h."""
    return max(1, int(round(1.0 / validate_positive(h, "h"))))


def disk_arc_labels(focus_angle: float, half_width: float, radius: float = 1.0,
                    inside: int = 1, outside: int = LABEL_OPTIMIZABLE) -> LabelFunction:
    """Label function tagging edges whose midpoint angle lies within half_width/radius of focus_angle."""
    def label(midpoints: np.ndarray) -> np.ndarray:
        phi = np.arctan2(midpoints[:, 1], midpoints[:, 0])
        delta = np.abs(np.angle(np.exp(1j * (phi - focus_angle))))
        return np.where(delta * radius < half_width, inside, outside)
    return label
