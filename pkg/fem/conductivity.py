"""
Conductivity equation -div(gamma grad u) = f with Robin, Neumann and Dirichlet boundary parts.
"""
import logging
from typing import Any, Optional
import numpy as np
import scipy.sparse as sp
from mesh2d.mesh import Mesh2D
from fem.assembly import edge_load, edge_mass, interval_load, interval_mass, load, mass, stiffness
from fem.fields import BcSpec, EdgeInput, FemField, Objective, robin_eps
from fem.linear import solve_lifted, solve_mean_zero
from fem.objectives import adjoint_source
from utils.constants import MODEL_CONDUCTIVITY
from utils.decorators import finite_result, timed
from utils.errors import ConsistencyError, SolvabilityError

logger = logging.getLogger(__name__)


def conductivity_bc(mesh: Mesh2D, g: EdgeInput = None, robin: EdgeInput = None,
                    tags: Optional[np.ndarray] = None, u_in: Any = 0.0) -> BcSpec:
    """Boundary conditions of a conductivity solve: fluxes, Robin terms and Dirichlet tags."""
    bc = BcSpec.natural(mesh).with_flux(mesh, g).with_robin(mesh, robin)
    if tags is not None:
        bc = bc.with_dirichlet(tags, u_in)
    return bc


def conductivity_operator(mesh: Mesh2D, gamma: Any, bc: BcSpec) -> sp.csr_matrix:
    """Stiffness plus the Robin boundary mass of every non-Dirichlet edge."""
    robin = np.where(bc.dirichlet[:, None], 0.0, bc.robin)
    matrix = stiffness(mesh, gamma) + edge_mass(mesh, robin)
    for data in bc.interval_robin:
        matrix = matrix + interval_mass(mesh, data)
    return matrix.tocsr()


def conductivity_load(mesh: Mesh2D, f: Any, bc: BcSpec) -> np.ndarray:
    flux = np.where(bc.dirichlet[:, None], 0.0, bc.flux)
    rhs = load(mesh, f) + edge_load(mesh, flux)
    for data in bc.interval_flux:
        rhs = rhs + interval_load(mesh, data)
    return rhs


def _solve(mesh: Mesh2D, matrix: sp.csr_matrix, rhs: np.ndarray, bc: BcSpec, context: str):
    if bc.has_dirichlet:
        fixed, values = bc.dirichlet_dofs(mesh)
        return solve_lifted(matrix, rhs, fixed, values, context)
    if bc.has_robin:
        return solve_lifted(matrix, rhs, context=context)

    # pure Neumann: solvable only for compatible data, made unique by zero mean
    weights = mass(mesh) @ np.ones(mesh.n_vertices)
    total = abs(rhs.sum())
    if total > 1e-10 * max(np.abs(rhs).sum(), 1e-300):
        raise SolvabilityError(
            f"{context}: no Robin or Dirichlet part and incompatible data (int f + int g = {total:.3e})"
        )
    logger.debug(f"{context}: pure Neumann problem, solving with zero mean")
    return solve_mean_zero(matrix, rhs, weights, context)


@timed
@finite_result
def solve_conductivity(mesh: Mesh2D, gamma: Any, f: Any, bc: BcSpec,
                       eps: Optional[float] = None) -> FemField:
    """
    Solve the conductivity equation for arbitrary boundary conditions.

    Raises:
        SolvabilityError: For singular systems
    """
    matrix = conductivity_operator(mesh, gamma, bc)
    rhs = conductivity_load(mesh, f, bc)
    values, residual = _solve(mesh, matrix, rhs, bc, "conductivity state")
    return FemField(mesh, values, MODEL_CONDUCTIVITY, eps=eps, residual=residual)


def solve_conductivity_smoothed(mesh: Mesh2D, gamma: Any = 1.0, f: Any = 0.0, g: EdgeInput = None,
                                robin: EdgeInput = None) -> FemField:
    """
    State of the Robin-smoothed problem gamma du/dn + h_eps u = g.

    Args:
        mesh: domain mesh
        gamma: conductivity (constant, polynomial, callable or per-triangle array)
        f: volume source
        g: boundary flux ({label: value}, edge array or IntervalData)
        robin: RobinCoefficient(s) or edge coefficients

    Returns:
        FemField tagged with the smoothing length
    """
    bc = conductivity_bc(mesh, g, robin)
    return solve_conductivity(mesh, gamma, f, bc, eps=robin_eps(robin))


def solve_conductivity_sharp(mesh: Mesh2D, gamma: Any = 1.0, f: Any = 0.0, g: EdgeInput = None,
                             tags: Optional[np.ndarray] = None, u_in: Any = 0.0,
                             robin: EdgeInput = None) -> FemField:
    """
    State with u = u_in imposed exactly on the vertices of tagged edges.

    The mesh must be fitted to the region so that its end points are vertices.
    """
    bc = conductivity_bc(mesh, g, robin, tags, u_in)
    return solve_conductivity(mesh, gamma, f, bc)


@timed
@finite_result
def solve_conductivity_adjoint(mesh: Mesh2D, gamma: Any, u: FemField, obj: Objective,
                               robin: EdgeInput = None, tags: Optional[np.ndarray] = None) -> FemField:
    """
    Adjoint state p with A p = -dJ/du for the operator of the state solve.

    Gradient objectives enter weakly as -int j'(grad u) . grad v, which
    carries the boundary flux -j'(grad u) . n.

    Raises:
        ConsistencyError: If u was solved on another mesh
    """
    if u.mesh is not mesh:
        raise ConsistencyError("Adjoint requested on a different mesh than the state")
    bc = conductivity_bc(mesh, None, robin, tags, 0.0).homogeneous()
    matrix = conductivity_operator(mesh, gamma, bc)
    rhs = -adjoint_source(obj, u)
    values, residual = _solve(mesh, matrix, rhs, bc, "conductivity adjoint")
    return FemField(mesh, values, MODEL_CONDUCTIVITY, eps=u.eps, objective=obj.name,
                    residual=residual, kind="adjoint")
