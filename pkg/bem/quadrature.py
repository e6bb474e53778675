"""
Quadrature for Galerkin pair integrals of weakly singular kernels over flat triangles.

Inner integrals are evaluated semi-analytically: the triangle seen from the
outer point x is split into the three sub-triangles (x, a, b) over its edges,
the radial integral of the affine basis is exact for kernels homogeneous of
degree -1, and the remaining angular integral is taken in the sinh variable
z = asinh(u / p) along each edge, which keeps it smooth for any distance p
between x and the edge line. Outer integrals use collapsed tensor Gauss
rules, graded toward the triangle edges for touching and nearby pairs.
"""
import logging
from functools import lru_cache
from typing import Optional, Tuple
import numpy as np
from bem.kernels import Kernel
from utils.constants import DEFAULT_QUADRATURE_ORDER, DEGENERATE_AREA_FACTOR, NEAR_FIELD_FACTOR
from utils.errors import GeometryError, ValidationError
from utils.validators import validate_count

logger = logging.getLogger(__name__)

CASE_DISJOINT = 0
CASE_VERTEX = 1
CASE_EDGE = 2
CASE_IDENTICAL = 3
CASE_NAMES = {CASE_DISJOINT: "disjoint", CASE_VERTEX: "vertex", CASE_EDGE: "edge", CASE_IDENTICAL: "identical"}

# vertices closer than this (relative to the triangle size) are shared
SHARED_VERTEX_TOLERANCE = 1e-12


# ==================== RULES ====================

@lru_cache(maxsize=None)
def gauss_unit(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def collapsed_rule(n: int, graded: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """
    Tensor Gauss rule on the reference triangle {x1, x2 >= 0, x1 + x2 <= 1}.

    graded applies t -> 3t^2 - 2t^3 in both directions, clustering points at
    the three edges where the outer integrand of touching pairs is singular.

    Returns:
        points (n^2, 2), weights (n^2,) summing to 1/2
    """
    t, w = gauss_unit(n)
    if graded:
        w = w * 6.0 * t * (1.0 - t)
        t = t * t * (3.0 - 2.0 * t)
    u, v = np.meshgrid(t, t, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    points = np.column_stack([u.reshape(-1), (v * (1.0 - u)).reshape(-1)])
    weights = (wu * wv * (1.0 - u)).reshape(-1)
    return points, weights


def reference_basis(points: np.ndarray) -> np.ndarray:
    """P1 basis values at reference points; basis i belongs to local vertex i."""
    return np.column_stack([1.0 - points[:, 0] - points[:, 1], points[:, 0], points[:, 1]])


def map_to_triangles(tris: np.ndarray, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Images of reference points in triangles of shape (p, 3, 2).

    Returns:
        physical points (p, m, 2), Jacobians 2 |area| (p,)
    """
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    mapped = tris[:, None, 0] + points[None, :, 0, None] * e1[:, None] + points[None, :, 1, None] * e2[:, None]
    jac = np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    return mapped, jac


def barycentric(tris: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of points (p, n, 2) in triangles (p, 3, 2)."""
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    rel = points - tris[:, None, 0]
    l1 = (rel[..., 0] * e2[:, None, 1] - rel[..., 1] * e2[:, None, 0]) / det[:, None]
    l2 = (e1[:, None, 0] * rel[..., 1] - e1[:, None, 1] * rel[..., 0]) / det[:, None]
    return np.stack([1.0 - l1 - l2, l1, l2], axis=-1)


def check_triangles(tris: np.ndarray) -> None:
    """Raise GeometryError for degenerate triangles."""
    tris = np.asarray(tris, dtype=float).reshape(-1, 3, 2)
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    size = max_edge(tris)
    if np.any(area <= DEGENERATE_AREA_FACTOR * size ** 2):
        raise GeometryError("Degenerate triangle in pair integral")


def max_edge(tris: np.ndarray) -> np.ndarray:
    edges = tris[:, [1, 2, 0]] - tris
    return np.linalg.norm(edges, axis=-1).max(axis=1)


# ==================== INNER INTEGRALS ====================

def inner_integrals(kernel: Kernel, points: np.ndarray, tris: np.ndarray, nz: int) -> np.ndarray:
    """
    int_T k(x - y) b_j(y) dy for in-plane points x.

    Args:
        kernel: homogeneous kernel of degree -1
        points: (p, n, 2), outer points per triangle
        tris: (p, 3, 2)
        nz: Gauss points per edge in the sinh variable

    Returns:
        (p, n, 3) for scalar kernels, (p, n, 3, a, a) for matrix kernels
    """
    if not kernel.homogeneous:
        raise ValidationError(f"Kernel '{kernel.kind}' is not homogeneous of degree -1", "kernel")
    zg, zw = gauss_unit(nz)
    shape = points.shape[:2]
    extra = () if kernel.arity == 1 else (kernel.arity, kernel.arity)
    out = np.zeros(shape + (3,) + extra)
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    orientation = np.sign(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])[:, None]

    for e in range(3):
        va = tris[:, e][:, None, :]
        vb = tris[:, (e + 1) % 3][:, None, :]
        edge = vb - va
        ell = np.linalg.norm(edge, axis=-1)
        tau = edge / ell[..., None]
        rel = points - va
        # signed distance, positive on the inner side of the edge
        p = orientation * (tau[..., 0] * rel[..., 1] - tau[..., 1] * rel[..., 0])
        along = np.einsum("pnd,pnd->pn", rel, np.broadcast_to(tau, rel.shape))
        foot = va + along[..., None] * tau
        ap = np.abs(p)
        active = ap > SHARED_VERTEX_TOLERANCE * ell
        ap = np.where(active, ap, 1.0)
        z1 = np.arcsinh(-along / ap)
        z2 = np.arcsinh((ell - along) / ap)
        z = z1[..., None] + (z2 - z1)[..., None] * zg
        u = ap[..., None] * np.sinh(z)
        y = foot[..., None, :] + u[..., None] * tau[..., None, :]
        radius = ap[..., None] * np.cosh(z)
        omega = (y - points[..., None, :]) / radius[..., None]
        values = kernel.direction_values(-omega)
        bary = barycentric(tris, (0.5 * (y + points[..., None, :])).reshape(len(tris), -1, 2))
        bary = bary.reshape(shape + (nz, 3))
        weight = np.where(active, p, 0.0)[..., None] * (z2 - z1)[..., None] * zw
        if extra:
            out += np.einsum("pnz,pnzab,pnzj->pnjab", weight, values, bary)
        else:
            out += np.einsum("pnz,pnz,pnzj->pnj", weight, values, bary)
    return out


# ==================== PAIR INTEGRALS ====================

def outer_order(case: int, q: int) -> int:
    """Outer Gauss order per case: identical q+2, shared edge q+1, otherwise q."""
    return {CASE_IDENTICAL: q + 2, CASE_EDGE: q + 1}.get(case, q)


def near_pair_integrals(kernel: Kernel, tris_k: np.ndarray, tris_l: np.ndarray, order: int, nz: int) -> np.ndarray:
    """
    Local Galerkin blocks int_Tk b_i(x) int_Tl k(x - y) b_j(y) for touching or close pairs.

    Returns:
        (p, 3, 3) or (p, 3, 3, a, a)
    """
    ref, w = collapsed_rule(order, graded=True)
    points, jac = map_to_triangles(tris_k, ref)
    inner = inner_integrals(kernel, points, tris_l, nz)
    weights = jac[:, None] * w[None, :]
    basis = reference_basis(ref)
    if kernel.arity == 1:
        return np.einsum("pn,ni,pnj->pij", weights, basis, inner)
    return np.einsum("pn,ni,pnjab->pijab", weights, basis, inner)


def far_pair_integrals(kernel: Kernel, tris_k: np.ndarray, tris_l: np.ndarray, order: int) -> np.ndarray:
    """Plain tensor Gauss on both triangles for well separated pairs."""
    ref, w = collapsed_rule(order)
    xs, jk = map_to_triangles(tris_k, ref)
    ys, jl = map_to_triangles(tris_l, ref)
    basis = reference_basis(ref)
    values = kernel.values(xs[:, :, None, :] - ys[:, None, :, :])
    wk = jk[:, None] * w[None, :]
    wl = jl[:, None] * w[None, :]
    if kernel.arity == 1:
        return np.einsum("pm,pn,mi,nj,pmn->pij", wk, wl, basis, basis, values)
    return np.einsum("pm,pn,mi,nj,pmnab->pijab", wk, wl, basis, basis, values)


def symmetrize_identical(local: np.ndarray) -> np.ndarray:
    """Average a self-interaction block with its (block) transpose."""
    if local.ndim == 3:
        return 0.5 * (local + local.transpose(0, 2, 1))
    return 0.5 * (local + local.transpose(0, 2, 1, 4, 3))


def classify_pair(tri_k: np.ndarray, tri_l: np.ndarray) -> int:
    """Number of shared vertices of two triangles given by coordinates."""
    size = max(max_edge(tri_k[None])[0], max_edge(tri_l[None])[0])
    gaps = np.linalg.norm(tri_k[:, None, :] - tri_l[None, :, :], axis=-1)
    return int(np.sum(gaps.min(axis=1) <= SHARED_VERTEX_TOLERANCE * size))


def singular_pair_integral(tri_k, tri_l, kernel: Kernel, i: Optional[int] = None, j: Optional[int] = None,
                           q: int = DEFAULT_QUADRATURE_ORDER):
    """
    Galerkin pair integral of two flat triangles.

    Touching pairs (identical, shared edge, shared vertex) and pairs whose
    centroids are closer than NEAR_FIELD_FACTOR times the larger edge use the
    semi-analytic inner integral; other pairs use tensor Gauss of order
    max(2, q - 1).

    Args:
        tri_k, tri_l: (3, 2) vertex coordinates in the plane x3 = 0
        kernel: homogeneous kernel
        i, j: local basis indices; the full 3x3 block is returned when omitted
        q: quadrature order, at least 2

    Returns:
        scalar (or a x a matrix) for given i, j; otherwise (3, 3[, a, a])

    Raises:
        GeometryError: For a degenerate triangle
    """
    q = validate_count(q, "q", minimum=2)
    tri_k = np.asarray(tri_k, dtype=float).reshape(3, 2)
    tri_l = np.asarray(tri_l, dtype=float).reshape(3, 2)
    check_triangles(np.stack([tri_k, tri_l]))
    case = classify_pair(tri_k, tri_l)
    separation = np.linalg.norm(tri_k.mean(axis=0) - tri_l.mean(axis=0))
    reach = NEAR_FIELD_FACTOR * max(max_edge(tri_k[None])[0], max_edge(tri_l[None])[0])

    if case == CASE_DISJOINT and separation >= reach:
        local = far_pair_integrals(kernel, tri_k[None], tri_l[None], max(2, q - 1))[0]
    else:
        local = near_pair_integrals(kernel, tri_k[None], tri_l[None], outer_order(case, q), 2 * q)
        if case == CASE_IDENTICAL:
            local = symmetrize_identical(local)
        local = local[0]
    logger.debug(f"Pair integral: {CASE_NAMES[case]} case, q={q}")

    if i is None or j is None:
        return local
    value = local[i, j]
    return float(value) if kernel.arity == 1 else value
