"""
P1 assembly: element matrices, quadrature rules and boundary terms.
All global matrices are scipy.sparse CSR; duplicates are summed by the COO conversion.
"""
import logging
from typing import Any, Tuple
import numpy as np
import scipy.sparse as sp
from mesh2d.mesh import Mesh2D
from fem.fields import IntervalData
from utils.expressions import Polynomial
from utils.errors import ValidationError

logger = logging.getLogger(__name__)

# ==================== QUADRATURE ====================

# degree-2 rule on triangles, barycentric points and weights (sum 1)
TRI3_POINTS = np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]])
TRI3_WEIGHTS = np.full(3, 1 / 3)

# degree-5 rule, used for error norms
_A, _B = 0.470142064105115, 0.101286507323456
TRI7_POINTS = np.array([
    [1 / 3, 1 / 3, 1 / 3],
    [_A, _A, 1 - 2 * _A], [_A, 1 - 2 * _A, _A], [1 - 2 * _A, _A, _A],
    [_B, _B, 1 - 2 * _B], [_B, 1 - 2 * _B, _B], [1 - 2 * _B, _B, _B],
])
TRI7_WEIGHTS = np.array([0.225] + [0.132394152788506] * 3 + [0.125939180544827] * 3)

# 2-point Gauss on [0, 1]
EDGE2_POINTS = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
EDGE2_WEIGHTS = np.array([0.5, 0.5])


def quadrature(mesh: Mesh2D, rule: str = "tri3") -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Quadrature points of every triangle.

    Returns:
        points (m, q, 2), weights (m, q) including the area, basis values (q, 3)
    """
    bary, weights = (TRI7_POINTS, TRI7_WEIGHTS) if rule == "tri7" else (TRI3_POINTS, TRI3_WEIGHTS)
    corners = mesh.vertices[mesh.triangles]
    points = np.einsum("qk,mkd->mqd", bary, corners)
    return points, mesh.areas[:, None] * weights[None, :], bary


def evaluate_source(source: Any, points: np.ndarray, vector: bool = False) -> np.ndarray:
    """
    Values of a source term at points of shape (..., 2).

    Sources are constants, Polynomials, callables of points or, for
    vector problems, pairs of those.
    """
    shape = points.shape[:-1]
    if source is None:
        return np.zeros(shape + ((2,) if vector else ()))
    if vector and isinstance(source, (tuple, list)) and len(source) == 2:
        return np.stack([evaluate_source(s, points) for s in source], axis=-1)
    if isinstance(source, Polynomial):
        return source.at(points)
    if callable(source):
        return np.asarray(source(points))
    value = np.asarray(source)
    if value.ndim == 0 or (vector and value.shape == (2,)):
        return np.broadcast_to(value, shape + value.shape).copy()
    raise ValidationError(f"Unsupported source of shape {value.shape}", "source")


def triangle_coefficient(mesh: Mesh2D, gamma: Any) -> np.ndarray:
    """Piecewise-constant coefficient per triangle (evaluated at centroids)."""
    if gamma is None:
        return np.ones(mesh.n_triangles)
    array = np.asarray(gamma) if not (callable(gamma) or isinstance(gamma, Polynomial)) else None
    if array is not None and array.shape == (mesh.n_triangles,):
        values = array.astype(float)
    else:
        centroids = mesh.vertices[mesh.triangles].mean(axis=1)
        values = np.asarray(evaluate_source(gamma, centroids), dtype=float)
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise ValidationError("Conductivity must be positive and finite", "gamma")
    return values


# ==================== DOMAIN TERMS ====================

def basis_gradients(mesh: Mesh2D) -> np.ndarray:
    """Gradients of the three P1 basis functions on every triangle, shape (m, 3, 2)."""
    p = mesh.vertices[mesh.triangles]
    # opposite edge rotated by +90 degrees points into the triangle
    opposite = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    grads = np.stack([-opposite[..., 1], opposite[..., 0]], axis=-1)
    return grads / (2.0 * mesh.areas[:, None, None])


def _scatter(mesh: Mesh2D, local: np.ndarray, size: int = None, dofs: np.ndarray = None) -> sp.csr_matrix:
    dofs = mesh.triangles if dofs is None else dofs
    k = dofs.shape[1]
    rows = np.repeat(dofs, k, axis=1).reshape(-1)
    cols = np.tile(dofs, (1, k)).reshape(-1)
    size = mesh.n_vertices if size is None else size
    return sp.coo_matrix((local.reshape(-1), (rows, cols)), shape=(size, size)).tocsr()


def stiffness(mesh: Mesh2D, gamma: Any = None) -> sp.csr_matrix:
    """K_ij = int gamma grad(b_i) . grad(b_j)."""
    grads = basis_gradients(mesh)
    coeff = triangle_coefficient(mesh, gamma) * mesh.areas
    local = np.einsum("m,mid,mjd->mij", coeff, grads, grads)
    return _scatter(mesh, local)


def mass(mesh: Mesh2D) -> sp.csr_matrix:
    """Consistent P1 mass matrix."""
    pattern = (np.ones((3, 3)) + np.eye(3)) / 12.0
    local = mesh.areas[:, None, None] * pattern[None]
    return _scatter(mesh, local)


def load(mesh: Mesh2D, source: Any, vector: bool = False) -> np.ndarray:
    """F_i = int f b_i with the degree-2 rule; vertex-major layout for vector sources."""
    points, weights, bary = quadrature(mesh)
    values = evaluate_source(source, points, vector)
    n = mesh.n_vertices
    if not vector:
        local = np.einsum("mq,mq,qk->mk", weights, values, bary)
        return _bincount(mesh.triangles.reshape(-1), local.reshape(-1), n)
    out = np.zeros((n, 2))
    for c in (0, 1):
        local = np.einsum("mq,mq,qk->mk", weights, values[..., c], bary)
        out[:, c] = np.bincount(mesh.triangles.reshape(-1), local.reshape(-1), minlength=n)
    return out.reshape(-1)


def elasticity_stiffness(mesh: Mesh2D, lam: float, mu: float) -> sp.csr_matrix:
    """int 2 mu e(u):e(v) + lam div(u) div(v), dofs 2 * vertex + component."""
    grads = basis_gradients(mesh)
    m = mesh.n_triangles
    strain = np.zeros((m, 3, 6))
    strain[:, 0, 0::2] = grads[..., 0]
    strain[:, 1, 1::2] = grads[..., 1]
    strain[:, 2, 0::2] = grads[..., 1]
    strain[:, 2, 1::2] = grads[..., 0]
    law = np.array([[lam + 2 * mu, lam, 0.0], [lam, lam + 2 * mu, 0.0], [0.0, 0.0, mu]])
    local = mesh.areas[:, None, None] * np.einsum("mai,ab,mbj->mij", strain, law, strain)
    dofs = np.repeat(2 * mesh.triangles, 2, axis=1) + np.tile([0, 1], 3)[None, :]
    return _scatter(mesh, local, 2 * mesh.n_vertices, dofs)


# ==================== BOUNDARY TERMS ====================

def _edge_basis(t: np.ndarray) -> np.ndarray:
    return np.stack([1.0 - t, t], axis=-1)


def edge_mass(mesh: Mesh2D, coefficient: np.ndarray) -> sp.csr_matrix:
    """
    R_ij = int_{boundary} c b_i b_j with c linear on each edge.

    coefficient has shape (b, 2) (values at both edge ends); the 2-point
    Gauss rule is exact for the cubic integrand.
    """
    basis = _edge_basis(EDGE2_POINTS)                      # (2 points, 2 ends)
    c = np.asarray(coefficient) @ basis.T                  # (b, 2 points)
    w = mesh.edge_lengths[:, None] * EDGE2_WEIGHTS[None, :]
    local = np.einsum("bq,bq,qi,qj->bij", w, c, basis, basis)
    return _edge_scatter(mesh, local)


def edge_load(mesh: Mesh2D, flux: np.ndarray) -> np.ndarray:
    """F_i = int_{boundary} g b_i with g linear per edge; (b, 2, 2) fluxes give a vector load."""
    flux = np.asarray(flux)
    basis = _edge_basis(EDGE2_POINTS)
    w = mesh.edge_lengths[:, None] * EDGE2_WEIGHTS[None, :]
    n = mesh.n_vertices
    ends = mesh.boundary_edges.reshape(-1)
    if flux.ndim == 2:
        g = flux @ basis.T
        local = np.einsum("bq,bq,qi->bi", w, g, basis).reshape(-1)
        return _bincount(ends, local, n)
    out = np.zeros((n, 2), dtype=flux.dtype)
    for c in (0, 1):
        g = flux[..., c] @ basis.T
        local = np.einsum("bq,bq,qi->bi", w, g, basis).reshape(-1)
        out[:, c] = _bincount(ends, local, n)
    return out.reshape(-1)


def _bincount(index: np.ndarray, values: np.ndarray, n: int) -> np.ndarray:
    if np.iscomplexobj(values):
        return np.bincount(index, values.real, minlength=n) + 1j * np.bincount(index, values.imag, minlength=n)
    return np.bincount(index, values, minlength=n)


def _edge_scatter(mesh: Mesh2D, local: np.ndarray, edges: np.ndarray = None) -> sp.csr_matrix:
    pairs = mesh.boundary_edges if edges is None else mesh.boundary_edges[edges]
    rows = np.repeat(pairs, 2, axis=1).reshape(-1)
    cols = np.tile(pairs, (1, 2)).reshape(-1)
    n = mesh.n_vertices
    return sp.coo_matrix((local.reshape(-1), (rows, cols)), shape=(n, n)).tocsr()


def _partial_moments(t0: np.ndarray, t1: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Exact integrals over [t0, t1] of 1-t, t, (1-t)^2, t(1-t), t^2."""
    d1 = t1 - t0
    d2 = (t1 ** 2 - t0 ** 2) / 2.0
    d3 = (t1 ** 3 - t0 ** 3) / 3.0
    return d1 - d2, d2, d1 - 2.0 * d2 + d3, d2 - d3, d3


def interval_mass(mesh: Mesh2D, data: IntervalData) -> sp.csr_matrix:
    """int over the intervals of value * b_i b_j, exact on partially covered edges."""
    edges, t0, t1 = data.pieces(mesh)
    _, _, m00, m01, m11 = _partial_moments(t0, t1)
    lengths = mesh.edge_lengths[edges]
    local = np.stack([np.stack([m00, m01], -1), np.stack([m01, m11], -1)], -2) * lengths[:, None, None]
    return data.value * _edge_scatter(mesh, local, edges)


def interval_load(mesh: Mesh2D, data: IntervalData, vector: bool = False) -> np.ndarray:
    """int over the intervals of value * b_i (value * n * b_i for normal tractions)."""
    edges, t0, t1 = data.pieces(mesh)
    m0, m1, _, _, _ = _partial_moments(t0, t1)
    local = np.stack([m0, m1], axis=-1) * mesh.edge_lengths[edges][:, None]
    ends = mesh.boundary_edges[edges].reshape(-1)
    n = mesh.n_vertices
    if not vector:
        if data.along_normal:
            raise ValidationError("Normal tractions need a vector problem", "along_normal")
        return _bincount(ends, (data.value * local).reshape(-1), n)
    if data.along_normal:
        direction = data.value * mesh.edge_normals[edges]
    else:
        direction = np.broadcast_to(np.asarray(data.value, dtype=float), (len(edges), 2))
    out = np.zeros((n, 2))
    for c in (0, 1):
        out[:, c] = np.bincount(ends, (local * direction[:, c:c + 1]).reshape(-1), minlength=n)
    return out.reshape(-1)


def expand_vector(matrix: sp.spmatrix) -> sp.csr_matrix:
    """Scalar matrix acting componentwise on vertex-major vector dofs."""
    return sp.kron(matrix, sp.identity(2), format="csr")
