"""
Sparse direct solves with Dirichlet lifting and residual audit.
"""
import logging
from typing import Optional, Tuple
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from utils.constants import CONDITION_LIMIT, RESIDUAL_WARN
from utils.errors import SolvabilityError, SolverError

logger = logging.getLogger(__name__)


def factorize(matrix: sp.spmatrix, context: str = "system") -> spla.SuperLU:
    """
    LU-factorize a sparse matrix.

    Raises:
        SolvabilityError: If the matrix is exactly singular
    """
    try:
        return spla.splu(sp.csc_matrix(matrix))
    except RuntimeError as e:
        raise SolvabilityError(f"{context} matrix is singular: {e}")


def relative_residual(matrix: sp.spmatrix, x: np.ndarray, rhs: np.ndarray) -> float:
    norm = np.linalg.norm(rhs)
    if norm == 0.0:
        return float(np.linalg.norm(matrix @ x))
    return float(np.linalg.norm(matrix @ x - rhs) / norm)


def solve_lifted(
    matrix: sp.spmatrix,
    rhs: np.ndarray,
    fixed: Optional[np.ndarray] = None,
    fixed_values: Optional[np.ndarray] = None,
    context: str = "system",
) -> Tuple[np.ndarray, float]:
    """
    Solve A x = b with x[fixed] = fixed_values imposed by substitution.

    Args:
        matrix: square sparse system
        rhs: load vector
        fixed: constrained indices
        fixed_values: their prescribed values
        context: name used in diagnostics

    Returns:
        (solution, relative residual of the free rows)

    Raises:
        SolvabilityError: If the reduced system is singular
        SolverError: If the solution is not finite
    """
    matrix = sp.csr_matrix(matrix)
    n = matrix.shape[0]
    dtype = np.result_type(matrix.dtype, rhs.dtype, float if fixed_values is None else fixed_values.dtype)
    x = np.zeros(n, dtype=dtype)

    free = np.ones(n, dtype=bool)
    if fixed is not None and len(fixed):
        free[fixed] = False
        x[fixed] = fixed_values

    reduced = matrix[free][:, free]
    reduced_rhs = rhs[free] - matrix[free][:, ~free] @ x[~free]
    if not np.any(reduced_rhs):
        return x, 0.0

    lu = factorize(reduced, context)
    x_free = lu.solve(np.asarray(reduced_rhs, dtype=np.result_type(reduced.dtype, reduced_rhs.dtype)))
    if not np.all(np.isfinite(x_free)):
        raise SolverError(f"{context} solve produced non-finite values")
    x[free] = x_free

    residual = relative_residual(reduced, x_free, reduced_rhs)
    if residual > RESIDUAL_WARN:
        logger.warning(f"{context}: relative residual {residual:.2e} above {RESIDUAL_WARN:.0e}")
    logger.debug(f"{context}: {int(free.sum())} unknowns, residual {residual:.2e}")
    return x, residual


def solve_mean_zero(matrix: sp.spmatrix, rhs: np.ndarray, weights: np.ndarray,
                    context: str = "system") -> Tuple[np.ndarray, float]:
    """
    Solve a singular pure-Neumann system with the constraint sum(weights * x) = 0.

    A Lagrange multiplier borders the matrix.
    """
    border = sp.csr_matrix(weights.reshape(1, -1))
    bordered = sp.bmat([[matrix, border.T], [border, None]], format="csc")
    extended = np.append(rhs, 0.0)
    lu = factorize(bordered, context)
    solution = lu.solve(np.asarray(extended, dtype=np.result_type(bordered.dtype, extended.dtype)))
    residual = relative_residual(bordered, solution, extended)
    return solution[:-1], residual


def condition_estimate(matrix: sp.spmatrix, lu: spla.SuperLU = None) -> float:
    """1-norm condition number estimate ||A|| ||A^-1||."""
    matrix = sp.csc_matrix(matrix)
    lu = lu or factorize(matrix)
    inverse = spla.LinearOperator(
        matrix.shape, matvec=lu.solve, rmatvec=lambda v: lu.solve(v, trans="H"), dtype=matrix.dtype
    )
    return float(spla.onenormest(matrix) * spla.onenormest(inverse))


def check_conditioning(matrix: sp.spmatrix, context: str) -> float:
    """
    Raises:
        SolvabilityError: If the condition estimate exceeds 1e14
    """
    estimate = condition_estimate(matrix)
    if estimate > CONDITION_LIMIT:
        raise SolvabilityError(f"{context} is near-singular (condition estimate {estimate:.2e})")
    logger.debug(f"{context}: condition estimate {estimate:.2e}")
    return estimate
