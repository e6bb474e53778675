"""
Plane linear elasticity -div(A e(u)) = f with tractions, Robin supports and clamped parts.
Displacement dofs are vertex-major: dof 2 * v + c is component c of vertex v.
"""
import logging
from typing import Any, Optional, Sequence, Tuple
import numpy as np
import scipy.sparse as sp
from mesh2d.mesh import Mesh2D
from fem.assembly import (
    basis_gradients, edge_load, edge_mass, elasticity_stiffness, expand_vector, interval_load,
    interval_mass, load
)
from fem.fields import BcSpec, EdgeInput, FemField, Objective, robin_eps
from fem.linear import solve_lifted
from fem.objectives import adjoint_source
from utils.constants import MODEL_ELASTICITY
from utils.decorators import timed
from utils.errors import ConsistencyError, SolvabilityError
from utils.validators import validate_poisson_ratio, validate_positive

logger = logging.getLogger(__name__)


def plane_stress_lame(E: float, nu: float) -> Tuple[float, float]:
    """
    Lame coefficients of a thin plate in plane stress.

    Returns:
        (lambda = E nu / (1 - nu^2), mu = E / (2 (1 + nu)))
    """
    E = validate_positive(E, "E")
    nu = validate_poisson_ratio(nu)
    return E * nu / (1.0 - nu ** 2), E / (2.0 * (1.0 + nu))


def elasticity_bc(mesh: Mesh2D, g: EdgeInput = None, robin: EdgeInput = None,
                  tags: Optional[np.ndarray] = None, u_d: Any = 0.0,
                  components: Tuple[bool, bool] = (True, True),
                  pinned: Sequence[Tuple[int, int]] = ()) -> BcSpec:
    """Tractions g, Robin supports, clamped edges (per-component) and pinned dofs."""
    bc = BcSpec.natural(mesh, vector=True).with_flux(mesh, g).with_robin(mesh, robin)
    if tags is not None:
        bc = bc.with_dirichlet(tags, u_d, components)
    for vertex, component in pinned:
        bc = bc.with_pinned(vertex, component)
    return bc


def _clamped(bc: BcSpec) -> np.ndarray:
    return bc.dirichlet if all(bc.components) else np.zeros_like(bc.dirichlet)


def elasticity_operator(mesh: Mesh2D, lam: float, mu: float, bc: BcSpec) -> sp.csr_matrix:
    """Elastic stiffness plus the Robin support term int c u . v."""
    robin = np.where(_clamped(bc)[:, None], 0.0, bc.robin)
    support = edge_mass(mesh, robin)
    for data in bc.interval_robin:
        support = support + interval_mass(mesh, data)
    return (elasticity_stiffness(mesh, lam, mu) + expand_vector(support)).tocsr()


def elasticity_load(mesh: Mesh2D, f: Any, bc: BcSpec) -> np.ndarray:
    flux = np.where(_clamped(bc)[:, None, None], 0.0, bc.flux)
    rhs = load(mesh, f, vector=True) + edge_load(mesh, flux)
    for data in bc.interval_flux:
        rhs = rhs + interval_load(mesh, data, vector=True)
    return rhs


def _solve(mesh: Mesh2D, matrix: sp.csr_matrix, rhs: np.ndarray, bc: BcSpec, context: str):
    if not bc.has_dirichlet and not bc.has_robin:
        raise SolvabilityError(f"{context}: pure traction problem has rigid-body modes")
    fixed, values = bc.dirichlet_dofs(mesh)
    return solve_lifted(matrix, rhs, fixed, values, context)


@timed
def solve_elasticity(mesh: Mesh2D, lam: float, mu: float, f: Any = None, g: EdgeInput = None,
                     robin: EdgeInput = None, tags: Optional[np.ndarray] = None, u_d: Any = 0.0,
                     components: Tuple[bool, bool] = (True, True),
                     pinned: Sequence[Tuple[int, int]] = ()) -> FemField:
    """
    Displacement field of the plane elasticity system.

    Args:
        mesh: domain mesh
        lam, mu: Lame coefficients (use plane_stress_lame for plates)
        f: body force, a pair of sources or a callable returning (q, 2)
        g: traction data ({label: (gx, gy)}, (b, 2, 2) array or IntervalData)
        robin: RobinCoefficient(s) for smoothed supports
        tags: clamped edges, displacement u_d on the selected components
        pinned: extra (vertex, component) dofs fixed to zero

    Raises:
        SolvabilityError: If rigid-body modes are not removed
    """
    lam = float(lam)
    mu = validate_positive(mu, "mu")
    bc = elasticity_bc(mesh, g, robin, tags, u_d, components, pinned)
    matrix = elasticity_operator(mesh, lam, mu, bc)
    rhs = elasticity_load(mesh, f, bc)
    values, residual = _solve(mesh, matrix, rhs, bc, "elasticity state")
    return FemField(mesh, values.reshape(-1, 2), MODEL_ELASTICITY, eps=robin_eps(robin), residual=residual)


@timed
def solve_elasticity_adjoint(mesh: Mesh2D, lam: float, mu: float, u: FemField, obj: Objective,
                             robin: EdgeInput = None, tags: Optional[np.ndarray] = None,
                             components: Tuple[bool, bool] = (True, True),
                             pinned: Sequence[Tuple[int, int]] = ()) -> FemField:
    """Adjoint p with -div(A e(p)) = -j'(u) and the homogeneous conditions of the state."""
    if u.mesh is not mesh:
        raise ConsistencyError("Adjoint requested on a different mesh than the state")
    bc = elasticity_bc(mesh, None, robin, tags, 0.0, components, pinned)
    matrix = elasticity_operator(mesh, float(lam), float(mu), bc)
    rhs = -adjoint_source(obj, u)
    values, residual = _solve(mesh, matrix, rhs, bc, "elasticity adjoint")
    return FemField(mesh, values.reshape(-1, 2), MODEL_ELASTICITY, eps=u.eps, objective=obj.name,
                    residual=residual, kind="adjoint")


def mean_strain(u: FemField) -> np.ndarray:
    """Area-averaged strain (e_xx, e_yy, e_xy)."""
    mesh = u.mesh
    grads = basis_gradients(mesh)
    nodal = u.values[mesh.triangles]
    du = np.einsum("mkd,mkc->mcd", grads, nodal)  # du[m, c, d] = d u_c / d x_d
    weights = mesh.areas / mesh.total_area
    exx = np.sum(weights * du[:, 0, 0])
    eyy = np.sum(weights * du[:, 1, 1])
    exy = np.sum(weights * 0.5 * (du[:, 0, 1] + du[:, 1, 0]))
    return np.array([exx, eyy, exy])
