"""
Regularized Galerkin solver for screen integral equations on the unit disk.

The discrete problem is (eta K_reg + B) phi = M f with B the P1 Galerkin
matrix of the single-layer operator, K_reg the surface-gradient (scalar) or
surface-elasticity (vector) stiffness and M the mass matrix. Vector unknowns
are stored component-major: dof c * N + v.
"""
import logging
from concurrent.futures import Executor
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Any, Optional, Tuple
import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.spatial import cKDTree
from bem.kernels import Kernel
from bem.quadrature import (
    CASE_EDGE, CASE_IDENTICAL, collapsed_rule, inner_integrals, near_pair_integrals, outer_order,
    reference_basis, symmetrize_identical
)
from fem.assembly import elasticity_stiffness, mass, stiffness
from mesh2d.mesh import DiskSurfaceMesh
from utils.constants import (
    ASSEMBLY_CHUNK, CONDITION_LIMIT, DEFAULT_QUADRATURE_ORDER, KERNEL_MINDLIN3D, NEAR_FIELD_FACTOR, RESIDUAL_WARN
)
from utils.decorators import timed
from utils.errors import SolverError, ValidationError
from utils.validators import validate_count, validate_non_negative

logger = logging.getLogger(__name__)

PAIR_CHUNK = 512


@dataclass(frozen=True)
class ScreenSystem:
    """
    Assembled screen system for one mesh, kernel and regularization weight.

    interaction is the dense matrix B; matrix = B + eta * regularizer.
    """
    mesh: DiskSurfaceMesh
    kernel: Kernel
    eta: float
    interaction: np.ndarray
    regularizer: sp.csr_matrix
    mass: sp.csr_matrix
    order: int = DEFAULT_QUADRATURE_ORDER

    @property
    def arity(self) -> int:
        return self.kernel.arity

    @property
    def size(self) -> int:
        return self.interaction.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self.interaction + self.eta * self.regularizer.toarray()

    @cached_property
    def factorization(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        LU factors of the system matrix, computed once.

        Raises:
            SolverError: If the matrix is singular to working precision
        """
        matrix = self.matrix
        anorm = np.linalg.norm(matrix, 1)
        try:
            lu, piv = la.lu_factor(matrix, overwrite_a=True, check_finite=True)
        except (ValueError, la.LinAlgError) as e:
            raise SolverError(f"Screen factorization failed: {e}")
        rcond, _ = la.lapack.dgecon(lu, anorm, norm="1")
        if not np.isfinite(rcond) or rcond < 1.0 / CONDITION_LIMIT:
            hint = " (use eta > 0)" if self.eta == 0 else ""
            raise SolverError(f"Screen system is singular to working precision, rcond={rcond:.3e}{hint}")
        logger.debug(f"Screen system factorized: n={self.size}, condition ~ {1.0 / rcond:.3e}")
        object.__setattr__(self, "_rcond", float(rcond))
        return lu, piv

    @property
    def condition_number(self) -> float:
        self.factorization
        return 1.0 / self._rcond

    def with_eta(self, eta: float) -> "ScreenSystem":
        """Same interaction matrix with another regularization weight."""
        eta = validate_non_negative(eta, "eta")
        _warn_small_eta(eta, self.mesh.h)
        return replace(self, eta=eta)

    def spectral_floor(self) -> float:
        """Smallest eigenvalue of the symmetric part of the system matrix."""
        matrix = self.matrix
        return float(la.eigvalsh(0.5 * (matrix + matrix.T), subset_by_index=[0, 0])[0])


@dataclass(frozen=True)
class ScreenDensity:
    """Solution phi_eta of a screen problem, nodal values (N,) or (N, a)."""
    mesh: DiskSurfaceMesh
    kernel: Kernel
    values: np.ndarray
    eta: float
    rhs: np.ndarray
    residual: float = 0.0

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == 2

    def integral(self) -> np.ndarray:
        """int phi ds, per component for vector densities."""
        weights = np.asarray(mass(self.mesh).sum(axis=0)).reshape(-1)
        return weights @ self.values

    def at_vertex(self, vertex: int):
        return self.values[vertex]


def _warn_small_eta(eta: float, h: float) -> None:
    if eta < (h / 10.0) ** 2:
        logger.warning(f"eta={eta:.3e} is small for mesh size h={h:.3e}; expect oscillations (eta < (h/10)^2)")


# ==================== NEAR FIELD ====================

def near_pairs(mesh: DiskSurfaceMesh) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Triangle pairs (k <= l) treated with the semi-analytic rule.

    A pair is near when the triangles share a vertex or their centroids are
    closer than NEAR_FIELD_FACTOR * h.

    Returns:
        k, l, number of shared vertices
    """
    n_tri = mesh.n_triangles
    incidence = sp.csr_matrix(
        (np.ones(3 * n_tri), (np.repeat(np.arange(n_tri), 3), mesh.triangles.reshape(-1))),
        shape=(n_tri, mesh.n_vertices),
    )
    shared = (incidence @ incidence.T).tocsr()
    close = cKDTree(mesh.centroids).query_pairs(NEAR_FIELD_FACTOR * mesh.h, output_type="ndarray")
    linked = sp.coo_matrix((np.ones(len(close)), (close[:, 0], close[:, 1])), shape=(n_tri, n_tri))
    union = sp.triu(linked + shared, format="coo")
    k, l = union.row, union.col
    order = np.lexsort((l, k))
    k, l = k[order], l[order]
    counts = np.asarray(shared[k, l]).reshape(-1).astype(int)
    return k, l, counts


def _near_mask(mesh: DiskSurfaceMesh, k: np.ndarray, l: np.ndarray) -> sp.csr_matrix:
    n_tri = mesh.n_triangles
    ones = np.ones(len(k), dtype=bool)
    upper = sp.coo_matrix((ones, (k, l)), shape=(n_tri, n_tri))
    return (upper + upper.T).tocsr().astype(bool)


def _block_entries(mesh: DiskSurfaceMesh, k: np.ndarray, l: np.ndarray, local: np.ndarray,
                   arity: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Entries of local blocks (p, 3, 3[, a, a]) at (k, l) plus their transposes at (l, k) for k != l."""
    n = mesh.n_vertices
    if arity == 1:
        local = local[..., None, None]
    rows_v = mesh.triangles[k][:, :, None, None, None]
    cols_v = mesh.triangles[l][:, None, :, None, None]
    comp_a = np.arange(arity)[None, None, None, :, None]
    comp_b = np.arange(arity)[None, None, None, None, :]
    shape = local.shape
    rows = np.broadcast_to(comp_a * n + rows_v, shape)
    cols = np.broadcast_to(comp_b * n + cols_v, shape)
    off = k != l
    data = np.concatenate([local.reshape(-1), local[off].reshape(-1)])
    r = np.concatenate([rows.reshape(-1), cols[off].reshape(-1)])
    c = np.concatenate([cols.reshape(-1), rows[off].reshape(-1)])
    return r, c, data


def _add_near_field(matrix: np.ndarray, mesh: DiskSurfaceMesh, kernel: Kernel, q: int,
                    k: np.ndarray, l: np.ndarray, counts: np.ndarray) -> None:
    corners = mesh.vertices[mesh.triangles]
    cases = np.minimum(counts, CASE_IDENTICAL)
    entries = []
    for case in np.unique(cases):
        selected = np.flatnonzero(cases == case)
        order = outer_order(int(case), q)
        for start in range(0, len(selected), PAIR_CHUNK):
            chunk = selected[start:start + PAIR_CHUNK]
            local = near_pair_integrals(kernel, corners[k[chunk]], corners[l[chunk]], order, 2 * q)
            if case == CASE_IDENTICAL:
                local = symmetrize_identical(local)
            entries.append(_block_entries(mesh, k[chunk], l[chunk], local, kernel.arity))
    rows, cols, data = (np.concatenate(part) for part in zip(*entries))
    size = matrix.shape[0]
    matrix += sp.coo_matrix((data, (rows, cols)), shape=(size, size)).toarray()
    logger.debug(
        f"Near field: {len(k)} pairs "
        f"({np.sum(cases == CASE_IDENTICAL)} identical, {np.sum(cases == CASE_EDGE)} shared edges)"
    )


# ==================== FAR FIELD ====================

def far_rule_points(mesh: DiskSurfaceMesh, q: int) -> Tuple[np.ndarray, np.ndarray, sp.csr_matrix, int]:
    """
    Tensor Gauss points of order max(2, q - 1) on every triangle.

    Returns:
        points (K m, 2), weights (K m,), basis matrix Phi (K m, N), m
    """
    ref, w = collapsed_rule(max(2, q - 1))
    m = len(w)
    corners = mesh.vertices[mesh.triangles]
    e1 = corners[:, 1] - corners[:, 0]
    e2 = corners[:, 2] - corners[:, 0]
    points = corners[:, None, 0] + ref[None, :, 0, None] * e1[:, None] + ref[None, :, 1, None] * e2[:, None]
    weights = (2.0 * mesh.areas)[:, None] * w[None, :]
    basis = reference_basis(ref)
    rows = np.repeat(np.arange(mesh.n_triangles * m), 3)
    cols = np.repeat(mesh.triangles, m, axis=0).reshape(-1)
    phi = sp.csr_matrix((np.tile(basis, (mesh.n_triangles, 1)).reshape(-1), (rows, cols)),
                        shape=(mesh.n_triangles * m, mesh.n_vertices))
    return points.reshape(-1, 2), weights.reshape(-1), phi, m


def masked_kernel(kernel: Kernel, d: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Kernel values with masked entries (near pairs, coincident points) set to zero."""
    r = np.linalg.norm(d, axis=-1)
    skip = mask | (r == 0.0)
    safe = np.where(skip[..., None], 1.0, d)
    values = kernel.values(safe)
    if kernel.arity == 1:
        return np.where(skip, 0.0, values)
    return np.where(skip[..., None, None], 0.0, values)


def _far_chunk(matrix: np.ndarray, kernel: Kernel, points: np.ndarray, weighted_phi: sp.csr_matrix,
               near: sp.csr_matrix, tris: np.ndarray, m: int, n: int) -> None:
    rows = slice(tris[0] * m, (tris[-1] + 1) * m)
    d = points[rows][:, None, :] - points[None, :, :]
    mask = np.repeat(np.repeat(near[tris].toarray(), m, axis=0), m, axis=1)
    values = masked_kernel(kernel, d, mask)
    left = weighted_phi[rows].T
    a = kernel.arity
    for i in range(a):
        for j in range(a):
            block = values if a == 1 else values[..., i, j]
            right = (weighted_phi.T @ block.T).T
            matrix[i * n:(i + 1) * n, j * n:(j + 1) * n] += left @ right


def _add_far_field(matrix: np.ndarray, mesh: DiskSurfaceMesh, kernel: Kernel, q: int, near: sp.csr_matrix,
                   executor: Optional[Executor] = None, workers: int = 1) -> None:
    points, weights, phi, m = far_rule_points(mesh, q)
    weighted_phi = (sp.diags(weights) @ phi).tocsr()
    per_chunk = max(1, ASSEMBLY_CHUNK // (m * kernel.arity ** 2))
    chunks = [np.arange(s, min(s + per_chunk, mesh.n_triangles)) for s in range(0, mesh.n_triangles, per_chunk)]
    n = mesh.n_vertices
    if executor is None or workers <= 1:
        for tris in chunks:
            _far_chunk(matrix, kernel, points, weighted_phi, near, tris, m, n)
        return

    # partial sums per contiguous group, reduced in group order
    def work(group):
        partial = np.zeros_like(matrix)
        for tris in group:
            _far_chunk(partial, kernel, points, weighted_phi, near, tris, m, n)
        return partial

    bounds = np.linspace(0, len(chunks), workers + 1).astype(int)
    groups = [chunks[bounds[i]:bounds[i + 1]] for i in range(workers)]
    for partial in executor.map(work, groups):
        matrix += partial


# ==================== ASSEMBLY ====================

def interaction_matrix(mesh: DiskSurfaceMesh, kernel: Kernel, q: int = DEFAULT_QUADRATURE_ORDER,
                       executor: Optional[Executor] = None, workers: int = 1) -> np.ndarray:
    """Dense Galerkin matrix B of the single-layer operator."""
    if not kernel.homogeneous:
        raise ValidationError(f"Screen solver needs a 3D kernel, got '{kernel.kind}'", "kernel")
    size = kernel.arity * mesh.n_vertices
    matrix = np.zeros((size, size))
    k, l, counts = near_pairs(mesh)
    _add_far_field(matrix, mesh, kernel, q, _near_mask(mesh, k, l), executor, workers)
    _add_near_field(matrix, mesh, kernel, q, k, l, counts)
    return matrix


def regularizer_matrix(mesh: DiskSurfaceMesh, kernel: Kernel) -> sp.csr_matrix:
    """
    Regularizing form on the flat disk with free boundary.

    Scalar kernels use the P1 surface-gradient stiffness. Vector kernels use
    the surface elasticity form: in-plane plane-strain elasticity with the
    kernel's Lame parameters and mu times the gradient stiffness for the
    normal component.
    """
    if kernel.arity == 1:
        return stiffness(mesh).tocsr()
    mu = kernel.mu
    lam = 2.0 * mu * kernel.nu / (1.0 - 2.0 * kernel.nu) if kernel.kind == KERNEL_MINDLIN3D else kernel.lam
    n = mesh.n_vertices
    perm = np.concatenate([2 * np.arange(n), 2 * np.arange(n) + 1])
    in_plane = elasticity_stiffness(mesh, lam, mu)[perm][:, perm]
    return sp.block_diag([in_plane, mu * stiffness(mesh)], format="csr")


def block_mass(mesh: DiskSurfaceMesh, arity: int) -> sp.csr_matrix:
    return sp.block_diag([mass(mesh)] * arity, format="csr")


@timed
def assemble_screen(mesh: DiskSurfaceMesh, kernel: Kernel, eta: float, q: int = DEFAULT_QUADRATURE_ORDER,
                    executor: Optional[Executor] = None, workers: int = 1) -> ScreenSystem:
    """
    Assemble the regularized screen system.

    Args:
        mesh: triangulated unit disk
        kernel: laplace3d, kelvin3d or mindlin3d
        eta: regularization weight, >= 0
        q: quadrature order
        executor: optional pool for the far-field blocks
        workers: number of far-field groups handed to the pool

    Returns:
        ScreenSystem (factorized lazily)
    """
    eta = validate_non_negative(eta, "eta")
    q = validate_count(q, "q", minimum=2)
    mesh.audit()
    _warn_small_eta(eta, mesh.h)
    logger.info(f"Assembling {kernel.kind} screen system: N={mesh.n_vertices}, h={mesh.h:.4g}, eta={eta:.3e}")
    return ScreenSystem(
        mesh=mesh,
        kernel=kernel,
        eta=eta,
        interaction=interaction_matrix(mesh, kernel, q, executor, workers),
        regularizer=regularizer_matrix(mesh, kernel),
        mass=block_mass(mesh, kernel.arity),
        order=q,
    )


# ==================== SOLVE ====================

def nodal_data(mesh: DiskSurfaceMesh, data: Any, arity: int) -> np.ndarray:
    """
    Nodal values of P1 boundary data.

    Accepts a constant, a constant vector of length a, an (N,) or (N, a)
    array, or a callable of (N, 2) points.
    """
    n = mesh.n_vertices
    if callable(data):
        data = data(mesh.vertices)
    value = np.asarray(data, dtype=float)
    if arity == 1:
        if value.ndim == 0:
            return np.full(n, float(value))
        if value.shape == (n,):
            return value.copy()
    else:
        if value.shape == (arity,):
            return np.tile(value, (n, 1))
        if value.shape == (n, arity):
            return value.copy()
    raise ValidationError(f"Screen data of shape {value.shape} does not fit {n} nodes x {arity}", "rhs")


def _stack(values: np.ndarray) -> np.ndarray:
    return values.T.reshape(-1) if values.ndim == 2 else values


@timed
def solve_screen(system: ScreenSystem, rhs: Any) -> ScreenDensity:
    """
    Solve (eta K_reg + B) phi = M f.

    Raises:
        SolverError: If the factorization fails
    """
    f = nodal_data(system.mesh, rhs, system.arity)
    load = system.mass @ _stack(f)
    n = system.mesh.n_vertices
    if not np.any(load):
        zero = np.zeros_like(f)
        return ScreenDensity(system.mesh, system.kernel, zero, system.eta, f, 0.0)

    x = la.lu_solve(system.factorization, load)
    if not np.all(np.isfinite(x)):
        raise SolverError("Screen solve produced non-finite values")
    residual = float(np.linalg.norm(system.matrix @ x - load) / np.linalg.norm(load))
    if residual > RESIDUAL_WARN:
        logger.warning(f"Screen solve residual {residual:.3e} exceeds {RESIDUAL_WARN:.0e}")
    values = x.reshape(system.arity, n).T if system.arity > 1 else x
    return ScreenDensity(system.mesh, system.kernel, values, system.eta, f, residual)


# ==================== POTENTIAL ====================

def single_layer_potential(density: ScreenDensity, points: np.ndarray,
                           q: int = DEFAULT_QUADRATURE_ORDER) -> np.ndarray:
    """
    T phi(x) = int k(x - z) phi(z) ds(z) at in-plane points.

    Triangles near a point use the semi-analytic inner rule, the others
    the tensor Gauss rule of order max(2, q - 1).

    Returns:
        (n,) or (n, a)
    """
    mesh, kernel = density.mesh, density.kernel
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    src, weights, phi, m = far_rule_points(mesh, q)
    src_values = phi @ density.values
    weighted = weights[:, None] * src_values.reshape(len(weights), -1)
    a = kernel.arity
    out = np.zeros((len(points), a))

    tree = cKDTree(mesh.centroids)
    hits = tree.query_ball_point(points, NEAR_FIELD_FACTOR * mesh.h)
    t_idx = np.repeat(np.arange(len(points)), [len(h) for h in hits])
    tri_idx = np.concatenate([np.asarray(h, dtype=int) for h in hits]) if len(points) else np.zeros(0, int)
    near = sp.csr_matrix((np.ones(len(t_idx), dtype=bool), (t_idx, tri_idx)),
                         shape=(len(points), mesh.n_triangles))

    step = max(1, ASSEMBLY_CHUNK // a ** 2)
    for start in range(0, len(points), step):
        rows = np.arange(start, min(start + step, len(points)))
        d = points[rows][:, None, :] - src[None, :, :]
        mask = np.repeat(near[rows].toarray(), m, axis=1)
        values = masked_kernel(kernel, d, mask)
        if a == 1:
            out[rows, 0] = values @ weighted[:, 0]
        else:
            out[rows] = np.einsum("tpab,pb->ta", values, weighted)

    corners = mesh.vertices[mesh.triangles]
    nodal = density.values.reshape(mesh.n_vertices, -1)
    for start in range(0, len(t_idx), PAIR_CHUNK):
        sel = slice(start, start + PAIR_CHUNK)
        inner = inner_integrals(kernel, points[t_idx[sel]][:, None, :], corners[tri_idx[sel]], 2 * q)[:, 0]
        local = nodal[mesh.triangles[tri_idx[sel]]]
        if a == 1:
            contribution = np.einsum("pj,pj->p", inner, local[..., 0])[:, None]
        else:
            contribution = np.einsum("pjab,pjb->pa", inner, local)
        np.add.at(out, t_idx[sel], contribution)
    return out[:, 0] if a == 1 else out
