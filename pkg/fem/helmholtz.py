"""
Interior Helmholtz model -div(gamma grad u) - k^2 u = f with impedance
gamma du/dn + i (k/Z) u = 0 on Gamma_R and Neumann elsewhere.
"""
import logging
from typing import Any, Tuple, Union
import numpy as np
import scipy.sparse as sp
from mesh2d.mesh import Mesh2D
from fem.assembly import edge_load, edge_mass, interval_load, interval_mass, load, mass, stiffness
from fem.fields import EdgeInput, FemField, IntervalData, Objective, edge_endpoint_values
from fem.linear import check_conditioning, solve_lifted
from fem.objectives import adjoint_source
from utils.constants import MODEL_HELMHOLTZ
from utils.decorators import timed
from utils.errors import ConsistencyError, ValidationError
from utils.validators import validate_positive

logger = logging.getLogger(__name__)

Impedance = Union[None, np.ndarray, IntervalData]


def impedance_mass(mesh: Mesh2D, impedance: Impedance) -> sp.csr_matrix:
    """int_{Gamma_R} b_i b_j for tagged edges or an arclength region."""
    if impedance is None:
        return sp.csr_matrix((mesh.n_vertices, mesh.n_vertices))
    if isinstance(impedance, IntervalData):
        return interval_mass(mesh, impedance.with_value(1.0)).real.tocsr()
    tags = np.asarray(impedance, dtype=bool)
    if tags.shape != (mesh.n_boundary_edges,):
        raise ValidationError(f"Expected {mesh.n_boundary_edges} impedance tags, got {tags.shape}", "impedance")
    return edge_mass(mesh, np.repeat(tags[:, None], 2, axis=1).astype(float))


def helmholtz_matrices(mesh: Mesh2D, gamma: Any, impedance: Impedance) -> Tuple[sp.csr_matrix, ...]:
    """(stiffness, mass, impedance mass)."""
    return stiffness(mesh, gamma), mass(mesh), impedance_mass(mesh, impedance)


def helmholtz_operator(mesh: Mesh2D, gamma: Any, k: float, Z: float, impedance: Impedance) -> sp.csr_matrix:
    """A = K - k^2 M + i (k/Z) R."""
    stiff, mass_matrix, boundary = helmholtz_matrices(mesh, gamma, impedance)
    return (stiff - k ** 2 * mass_matrix + 1j * (k / Z) * boundary).tocsr()


def helmholtz_load(mesh: Mesh2D, f: Any, g: EdgeInput = None) -> np.ndarray:
    rhs = load(mesh, f).astype(complex)
    if isinstance(g, IntervalData):
        return rhs + interval_load(mesh, g)
    if g is not None:
        rhs = rhs + edge_load(mesh, edge_endpoint_values(mesh, g))
    return rhs


def _check_parameters(k: float, Z: float) -> Tuple[float, float]:
    return validate_positive(k, "k"), validate_positive(Z, "Z")


def _has_impedance(impedance: Impedance, mesh: Mesh2D) -> bool:
    if impedance is None:
        return False
    if isinstance(impedance, IntervalData):
        return impedance.measure(mesh) > 0
    return bool(np.any(impedance))


@timed
def solve_helmholtz(mesh: Mesh2D, gamma: Any = 1.0, k: float = 1.0, Z: float = 1.0, f: Any = 0.0,
                    impedance: Impedance = None, g: EdgeInput = None) -> FemField:
    """
    Complex state of the interior Helmholtz problem.

    Args:
        impedance: boolean edge tags or IntervalData describing Gamma_R
        g: optional boundary datum, gamma du/dn + i (k/Z) u = g

    Raises:
        SolvabilityError: Without impedance when k^2 is close to a Neumann eigenvalue
    """
    k, Z = _check_parameters(k, Z)
    matrix = helmholtz_operator(mesh, gamma, k, Z, impedance)
    if not _has_impedance(impedance, mesh):
        logger.warning("Helmholtz solve without impedance boundary, checking conditioning")
        check_conditioning(matrix, "Helmholtz operator")
    rhs = helmholtz_load(mesh, f, g)
    values, residual = solve_lifted(matrix, rhs, context="Helmholtz state")
    return FemField(mesh, values.astype(complex), MODEL_HELMHOLTZ, residual=residual)


def helmholtz_adjoint_operator(mesh: Mesh2D, gamma: Any, k: float, Z: float, impedance: Impedance) -> sp.csr_matrix:
    """A^H: the impedance term changes sign."""
    return helmholtz_operator(mesh, gamma, k, Z, impedance).conj().T.tocsr()


@timed
def solve_helmholtz_adjoint(mesh: Mesh2D, gamma: Any, k: float, Z: float, u: FemField, obj: Objective,
                            impedance: Impedance = None) -> FemField:
    """
    Adjoint p with A^H p = -g, g_i = int j'(u) b_i and j' = d1 j + i d2 j.

    For real J, dJ = Re(p^H dA u - p^H dF) under a perturbation (dA, dF).
    """
    if u.mesh is not mesh:
        raise ConsistencyError("Adjoint requested on a different mesh than the state")
    k, Z = _check_parameters(k, Z)
    matrix = helmholtz_adjoint_operator(mesh, gamma, k, Z, impedance)
    rhs = -adjoint_source(obj, u).astype(complex)
    values, residual = solve_lifted(matrix, rhs, context="Helmholtz adjoint")
    return FemField(mesh, values.astype(complex), MODEL_HELMHOLTZ, objective=obj.name,
                    residual=residual, kind="adjoint")


def energy_balance_helmholtz(u: FemField, k: float, Z: float, f: Any = 0.0,
                             impedance: Impedance = None, g: EdgeInput = None) -> Tuple[float, float]:
    """
    Both sides of Im(u^H A u) = Im(u^H F).

    Returns:
        (power absorbed on Gamma_R, (k/Z) int |u|^2; power supplied, Im int f conj(u))
    """
    mesh = u.mesh
    boundary = impedance_mass(mesh, impedance)
    absorbed = (k / Z) * float(np.real(np.vdot(u.values, boundary @ u.values)))
    supplied = float(np.imag(np.vdot(u.values, helmholtz_load(mesh, f, g))))
    return absorbed, supplied
