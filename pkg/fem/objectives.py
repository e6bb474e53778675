"""
Objective evaluation, adjoint sources and point evaluation of P1 fields.
"""
import logging
import weakref
from typing import Any, Tuple
import numpy as np
from scipy.spatial import cKDTree
from mesh2d.mesh import Mesh2D
from fem.assembly import basis_gradients, evaluate_source, quadrature
from fem.fields import FemField, Objective
from utils.constants import OBJECTIVE_J_OF_GRAD, OBJECTIVE_MEAN_SQUARE, POINT_TOLERANCE
from utils.errors import ConsistencyError, GeometryError

logger = logging.getLogger(__name__)

_TREES: "weakref.WeakKeyDictionary[Mesh2D, cKDTree]" = weakref.WeakKeyDictionary()


def _at_quadrature(u: FemField, rule: str = "tri3") -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    points, weights, bary = quadrature(u.mesh, rule)
    nodal = u.values[u.mesh.triangles]
    if u.is_vector:
        values = np.einsum("qk,mkc->mqc", bary, nodal)
    else:
        values = np.einsum("qk,mk->mq", bary, nodal)
    return points, weights, values


def _gradients(u: FemField) -> np.ndarray:
    if u.is_vector:
        raise ConsistencyError("Gradient objectives are defined for scalar fields only")
    grads = basis_gradients(u.mesh)
    return np.einsum("mkd,mk->md", grads, u.values[u.mesh.triangles])


def evaluate_objective(obj: Objective, u: FemField, mesh: Mesh2D = None) -> float:
    """
    J(u) = int_Omega j, exact for the quadratic integrands of the presets.

    j_of_u and mean_square use the 3-point degree-2 rule; gradient
    objectives are constant per triangle.

    Raises:
        ConsistencyError: If mesh differs from the field's mesh
    """
    if mesh is not None and mesh is not u.mesh:
        raise ConsistencyError("Objective evaluated on a different mesh than the field")
    if obj.kind == OBJECTIVE_J_OF_GRAD:
        return float(np.real(np.sum(u.mesh.areas * obj.integrand(_gradients(u), True))))
    _, weights, values = _at_quadrature(u)
    total = float(np.real(np.sum(weights * obj.integrand(values, u.is_vector))))
    if obj.kind == OBJECTIVE_MEAN_SQUARE:
        total /= u.mesh.total_area
    return total


def adjoint_source(obj: Objective, u: FemField) -> np.ndarray:
    """
    Derivative of the discrete objective: g_i = int j'(u) b_i.

    For gradient objectives g_i = int j'(grad u) . grad b_i. Vector
    fields give a vertex-major flat vector.
    """
    mesh = u.mesh
    n = mesh.n_vertices
    flat = mesh.triangles.reshape(-1)
    if obj.kind == OBJECTIVE_J_OF_GRAD:
        flux = obj.derivative(_gradients(u))
        local = mesh.areas[:, None] * np.einsum("md,mkd->mk", flux, basis_gradients(mesh))
        return _accumulate(flat, local.reshape(-1), n)

    _, weights, values = _at_quadrature(u)
    derivative = obj.derivative(values)
    if obj.kind == OBJECTIVE_MEAN_SQUARE:
        derivative = derivative / mesh.total_area
    bary = quadrature(mesh)[2]
    if not u.is_vector:
        local = np.einsum("mq,mq,qk->mk", weights, derivative, bary)
        return _accumulate(flat, local.reshape(-1), n)
    out = np.zeros((n, 2), dtype=derivative.dtype)
    for c in (0, 1):
        local = np.einsum("mq,mq,qk->mk", weights, derivative[..., c], bary)
        out[:, c] = _accumulate(flat, local.reshape(-1), n)
    return out.reshape(-1)


def _accumulate(index: np.ndarray, values: np.ndarray, n: int) -> np.ndarray:
    if np.iscomplexobj(values):
        return np.bincount(index, values.real, minlength=n) + 1j * np.bincount(index, values.imag, minlength=n)
    return np.bincount(index, values, minlength=n)


# ==================== POINT EVALUATION ====================

def _barycentric(mesh: Mesh2D, triangles: np.ndarray, point: np.ndarray) -> np.ndarray:
    p = mesh.vertices[mesh.triangles[triangles]]
    v0 = p[:, 1] - p[:, 0]
    v1 = p[:, 2] - p[:, 0]
    w = point[None, :] - p[:, 0]
    det = v0[:, 0] * v1[:, 1] - v0[:, 1] * v1[:, 0]
    l1 = (w[:, 0] * v1[:, 1] - w[:, 1] * v1[:, 0]) / det
    l2 = (v0[:, 0] * w[:, 1] - v0[:, 1] * w[:, 0]) / det
    return np.column_stack([1.0 - l1 - l2, l1, l2])


def locate_point(mesh: Mesh2D, point) -> Tuple[int, np.ndarray]:
    """
    Containing triangle and barycentric coordinates of a point.

    Nearby triangles (by centroid) are tried first, then all of them.

    Raises:
        GeometryError: If no triangle contains the point
    """
    point = np.asarray(point, dtype=float)
    tree = _TREES.get(mesh)
    if tree is None:
        tree = cKDTree(mesh.vertices[mesh.triangles].mean(axis=1))
        _TREES[mesh] = tree
    k = min(16, mesh.n_triangles)
    _, near = tree.query(point, k=k)
    for candidates in (np.atleast_1d(near), np.arange(mesh.n_triangles)):
        bary = _barycentric(mesh, candidates, point)
        inside = np.flatnonzero(bary.min(axis=1) >= -POINT_TOLERANCE)
        if len(inside):
            best = inside[np.argmax(bary[inside].min(axis=1))]
            return int(candidates[best]), bary[best]
    raise GeometryError(f"Point ({point[0]:.6g}, {point[1]:.6g}) lies outside the domain")


def _boundary_hit(mesh: Mesh2D, point: np.ndarray) -> Tuple[int, float]:
    a = mesh.vertices[mesh.boundary_edges[:, 0]]
    b = mesh.vertices[mesh.boundary_edges[:, 1]]
    d = b - a
    t = np.clip(np.einsum("bd,bd->b", point[None, :] - a, d) / np.einsum("bd,bd->b", d, d), 0.0, 1.0)
    gap = np.hypot(*(a + t[:, None] * d - point[None, :]).T)
    edge = int(np.argmin(gap))
    if gap[edge] <= POINT_TOLERANCE * max(1.0, mesh.diameter):
        return edge, float(t[edge])
    return -1, 0.0


def interpolate_at(u: FemField, point) -> Any:
    """
    Value of a P1 field at a point.

    Points on the boundary use their boundary edge; interior points the
    containing triangle.

    Raises:
        GeometryError: If the point lies outside the domain
    """
    mesh = u.mesh
    point = np.asarray(point, dtype=float)
    edge, t = _boundary_hit(mesh, point)
    if edge >= 0:
        a, b = mesh.boundary_edges[edge]
        return (1.0 - t) * u.values[a] + t * u.values[b]
    triangle, bary = locate_point(mesh, point)
    return np.tensordot(bary, u.values[mesh.triangles[triangle]], axes=1)


def trace_at(u: FemField, s: float, loop: int = 0) -> Any:
    """Value of a field at arclength s of a boundary loop."""
    edge, t, _ = u.mesh.point_on_loop(s, loop)
    a, b = u.mesh.boundary_edges[edge]
    return (1.0 - t) * u.values[a] + t * u.values[b]


def l2_error(u: FemField, exact: Any) -> float:
    """||u - exact||_L2 with the degree-5 rule; exact is a constant, Polynomial or callable."""
    points, weights, values = _at_quadrature(u, "tri7")
    reference = evaluate_source(exact, points, u.is_vector)
    diff = np.abs(values - reference) ** 2
    if diff.ndim == 3:
        diff = diff.sum(axis=-1)
    return float(np.sqrt(np.sum(weights * diff)))
