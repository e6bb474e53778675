"""
Epsilon-sweep oracles: objectives of sharp solves with a small inserted
region, fitted against the predicted topological coefficient.
"""
import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple
import numpy as np
from derivatives.topological import (
    conduc_dirichlet_hom, conduc_dirichlet_inhom, elast_dirichlet_2d, mixer_anode, mixer_cathode
)
from fem.conductivity import solve_conductivity_adjoint, solve_conductivity_sharp
from fem.elasticity import plane_stress_lame, solve_elasticity, solve_elasticity_adjoint
from fem.fields import IntervalData, Objective
from fem.helmholtz import solve_helmholtz, solve_helmholtz_adjoint
from fem.objectives import evaluate_objective, trace_at
from mesh2d.generators import gen_disk_domain, gen_square_domain
from mesh2d.mesh import Mesh2D
from region.levelset import circular_distance

logger = logging.getLogger(__name__)

LOG_LAW_EPS = (1e-3, 3e-4, 1e-4, 3e-5)
LINEAR_LAW_EPS = (4e-3, 2e-3, 1e-3)


@dataclass(frozen=True)
class SweepResult:
    """Objective values J(eps) of one oracle and the fitted against the predicted coefficient."""
    name: str
    eps: List[float]
    J: List[float]
    J0: float
    predicted: float
    fitted: float

    @property
    def relative_error(self) -> float:
        return abs(self.fitted - self.predicted) / abs(self.predicted)

    def as_rows(self) -> List[dict]:
        return [{"oracle": self.name, "eps": e, "J": j, "J0": self.J0} for e, j in zip(self.eps, self.J)]


def _map(func: Callable, items: Sequence, executor: Optional[Executor]) -> List:
    return list(executor.map(func, items)) if executor is not None else [func(item) for item in items]


def fit_log_law(eps: Sequence[float], delta_J: Sequence[float]) -> float:
    """Coefficient a of delta_J = a / |log eps| + b / |log eps|^2 (least squares)."""
    inverse = 1.0 / np.abs(np.log(np.asarray(eps, dtype=float)))
    design = np.column_stack([inverse, inverse ** 2])
    coefficients, *_ = np.linalg.lstsq(design, np.asarray(delta_J, dtype=float), rcond=None)
    return float(coefficients[0])


def fit_slope(eps: Sequence[float], delta_J: Sequence[float]) -> float:
    """Slope of the least-squares line through (eps, delta_J)."""
    return float(np.polyfit(np.asarray(eps, dtype=float), np.asarray(delta_J, dtype=float), 1)[0])


# ==================== BENCHMARK GEOMETRY ====================

def benchmark_disk(eps_values: Sequence[float], target_h: float = 0.1, n_boundary: int = 64) -> Mesh2D:
    """Unit disk graded towards the top point, with vertices at arclength +-eps from it."""
    return gen_disk_domain(1.0, n_boundary, target_h, focus_angle=0.5 * math.pi, h_min=min(eps_values) / 4.0,
                           exact_arcs=sorted(eps_values))


def quarter(mesh: Mesh2D, center: float, half_width: float = 0.25 * math.pi) -> np.ndarray:
    """Boundary edges whose midpoint angle lies within half_width of center."""
    midpoints = mesh.edge_midpoints
    angles = np.arctan2(midpoints[:, 1], midpoints[:, 0])
    gap = np.abs((angles - center + math.pi) % (2.0 * math.pi) - math.pi)
    return gap <= half_width


def bottom_quarter(mesh: Mesh2D) -> np.ndarray:
    """Boundary edges whose midpoint angle lies in [-3pi/4, -pi/4]."""
    return quarter(mesh, -0.5 * math.pi)


def right_arc(mesh: Mesh2D) -> np.ndarray:
    """Boundary edges whose midpoint angle lies in [-pi/8, pi/8]."""
    return quarter(mesh, 0.0, 0.125 * math.pi)


def around_start(mesh: Mesh2D, eps: float, center: float = 0.0) -> np.ndarray:
    """Boundary edges of loop 0 whose midpoint lies within arclength eps of center."""
    tags = np.zeros(mesh.n_boundary_edges, dtype=bool)
    ids = mesh.loop_edge_ids(0)
    middle = mesh.arclength[ids] + 0.5 * mesh.edge_lengths[ids]
    tags[ids] = circular_distance(middle, center, mesh.loop_perimeter(0)) < eps
    return tags


def dirichlet_data(mesh: Mesh2D, parts: Sequence[Tuple[np.ndarray, float]]) -> Tuple[np.ndarray, np.ndarray]:
    """Union of tagged edge sets and the nodal values imposed on them, later parts winning."""
    tags = np.zeros(mesh.n_boundary_edges, dtype=bool)
    values = np.zeros(mesh.n_vertices)
    for part, value in parts:
        tags |= part
        values[np.unique(mesh.boundary_edges[part])] = value
    return tags, values


# ==================== ORACLES ====================

Part = Tuple[Callable[[Mesh2D], np.ndarray], float]


def dirichlet_insertion_law(name: str, parts: Sequence[Part], inserted: float, coefficient: Callable,
                            objective: Objective, f: float = 1.0, eps_values: Sequence[float] = LOG_LAW_EPS,
                            target_h: float = 0.1, n_boundary: int = 64,
                            executor: Optional[Executor] = None) -> SweepResult:
    """
    Dirichlet arc u = inserted of half-length eps added at the top of the benchmark disk.

    parts are (edge selector, value) pairs of the Dirichlet data already
    present; gamma = 1. The fitted 1/|log eps| coefficient should equal
    pi * coefficient(u0, p0) at the insertion point.
    """
    mesh = benchmark_disk(eps_values, target_h, n_boundary)
    base = [(select(mesh), value) for select, value in parts]
    tags, values = dirichlet_data(mesh, base)
    u0 = solve_conductivity_sharp(mesh, 1.0, f, None, tags, values)
    p0 = solve_conductivity_adjoint(mesh, 1.0, u0, objective, tags=tags)
    J0 = evaluate_objective(objective, u0)
    predicted = math.pi * float(coefficient(float(trace_at(u0, 0.0)), float(trace_at(p0, 0.0))))

    def J(eps: float) -> float:
        tags_eps, values_eps = dirichlet_data(mesh, base + [(around_start(mesh, eps), inserted)])
        return evaluate_objective(objective, solve_conductivity_sharp(mesh, 1.0, f, None, tags_eps, values_eps))

    J_values = _map(J, list(eps_values), executor)
    fitted = fit_log_law(eps_values, [value - J0 for value in J_values])
    logger.info(f"{name}: fitted {fitted:.5g}, predicted {predicted:.5g}")
    return SweepResult(name, list(eps_values), J_values, J0, predicted, fitted)


def conductivity_log_law(eps_values: Sequence[float] = LOG_LAW_EPS, executor: Optional[Executor] = None,
                         **mesh_options) -> SweepResult:
    """
    Homogeneous Dirichlet insertion at the top of the unit disk.

    gamma = 1, f = 1, j = u^2, u = 0 on the bottom quarter; the fitted
    1/|log eps| coefficient should equal pi gamma u0 p0.
    """
    return dirichlet_insertion_law(
        "conductivity_log_law", [(bottom_quarter, 0.0)], 0.0,
        lambda u0, p0: conduc_dirichlet_hom(u0, p0, 1.0), Objective.u2(),
        eps_values=eps_values, executor=executor, **mesh_options,
    )


def dirichlet_inhom_log_law(u_in: float = 2.0, eps_values: Sequence[float] = LOG_LAW_EPS,
                            executor: Optional[Executor] = None, **mesh_options) -> SweepResult:
    """Arc with u = u_in inserted next to the grounded bottom quarter; j = u, f = 1."""
    return dirichlet_insertion_law(
        "dirichlet_inhom_log_law", [(bottom_quarter, 0.0)], u_in,
        lambda u0, p0: conduc_dirichlet_inhom(u0, p0, 1.0, u_in), Objective.linear(),
        eps_values=eps_values, executor=executor, **mesh_options,
    )


def _electrodes(u_in: float) -> List[Part]:
    return [(bottom_quarter, 0.0), (right_arc, u_in)]


def mixer_cathode_log_law(u_in: float = 1.0, eps_values: Sequence[float] = LOG_LAW_EPS,
                          executor: Optional[Executor] = None, **mesh_options) -> SweepResult:
    """
    Cathode arc (u = 0) added at the top of a disk with a grounded bottom
    quarter and an anode (u = u_in) on the arc [-pi/8, pi/8]; j = u^2, f = 1.
    """
    return dirichlet_insertion_law(
        "mixer_cathode_log_law", _electrodes(u_in), 0.0,
        lambda u0, p0: mixer_cathode(u0, p0, 1.0), Objective.u2(),
        eps_values=eps_values, executor=executor, **mesh_options,
    )


def mixer_anode_log_law(u_in: float = 1.0, eps_values: Sequence[float] = LOG_LAW_EPS,
                        executor: Optional[Executor] = None, **mesh_options) -> SweepResult:
    """Anode arc (u = u_in) added at the top of the same two-electrode disk."""
    return dirichlet_insertion_law(
        "mixer_anode_log_law", _electrodes(u_in), u_in,
        lambda u0, p0: mixer_anode(u0, p0, 1.0, u_in), Objective.u2(),
        eps_values=eps_values, executor=executor, **mesh_options,
    )


def neumann_linear_law(eps_values: Sequence[float] = LINEAR_LAW_EPS, g: float = 1.0,
                       executor: Optional[Executor] = None, target_h: float = 0.1,
                       n_boundary: int = 64) -> SweepResult:
    """Flux g on an arc of half-length eps at the top of the benchmark disk; slope -2 g p0."""
    mesh = benchmark_disk(eps_values, target_h, n_boundary)
    objective = Objective.u2()
    base = bottom_quarter(mesh)
    perimeter = mesh.loop_perimeter(0)
    u0 = solve_conductivity_sharp(mesh, 1.0, 1.0, None, base)
    p0 = solve_conductivity_adjoint(mesh, 1.0, u0, objective, tags=base)
    J0 = evaluate_objective(objective, u0)
    predicted = -2.0 * g * float(trace_at(p0, 0.0))

    def J(eps: float) -> float:
        flux = IntervalData(((perimeter - eps, eps),), g)
        return evaluate_objective(objective, solve_conductivity_sharp(mesh, 1.0, 1.0, flux, base))

    values = _map(J, list(eps_values), executor)
    fitted = fit_slope(eps_values, [value - J0 for value in values])
    logger.info(f"Neumann linear law: fitted {fitted:.5g}, predicted {predicted:.5g}")
    return SweepResult("neumann_linear_law", list(eps_values), values, J0, predicted, fitted)


def helmholtz_insertion_law(eps_values: Sequence[float] = LINEAR_LAW_EPS, k: float = 3.0, Z: float = 1.0,
                            h: float = 1.0 / 32, executor: Optional[Executor] = None) -> SweepResult:
    """
    Impedance arc inserted at the middle of the bottom side of the unit square.

    The top side absorbs already so that u0 and p0 are genuinely complex;
    the slope in eps should equal 2 (k/Z) Im(conj(u0) p0).
    """
    mesh = gen_square_domain(1.0, h, (0, 0, 0, 0))
    objective = Objective.abs2()
    top = ((2.0, 3.0),)
    base = IntervalData(top)
    u0 = solve_helmholtz(mesh, 1.0, k, Z, 1.0, base)
    p0 = solve_helmholtz_adjoint(mesh, 1.0, k, Z, u0, objective, base)
    J0 = evaluate_objective(objective, u0)
    predicted = 2.0 * (k / Z) * float(np.imag(np.conj(trace_at(u0, 0.5)) * trace_at(p0, 0.5)))

    def J(eps: float) -> float:
        impedance = IntervalData(top + ((0.5 - eps, 0.5 + eps),))
        return evaluate_objective(objective, solve_helmholtz(mesh, 1.0, k, Z, 1.0, impedance))

    values = _map(J, list(eps_values), executor)
    fitted = fit_slope(eps_values, [value - J0 for value in values])
    logger.info(f"Helmholtz insertion law: fitted {fitted:.5g}, predicted {predicted:.5g}")
    return SweepResult("helmholtz_insertion_law", list(eps_values), values, J0, predicted, fitted)


def elasticity_log_law(eps_values: Sequence[float] = LOG_LAW_EPS, E: float = 1.0, nu: float = 0.3,
                       executor: Optional[Executor] = None, target_h: float = 0.1,
                       n_boundary: int = 64) -> SweepResult:
    """
    Clamped arc inserted at the top of a plane-stress disk under its own weight.

    The bottom quarter is clamped and j = |u|^2; the fitted 1/|log eps|
    coefficient should equal pi mu / (1 - nu/(1+nu)) u0 . p0.
    """
    mesh = benchmark_disk(eps_values, target_h, n_boundary)
    objective = Objective.u2()
    lam, mu = plane_stress_lame(E, nu)
    weight = (0.0, -1.0)
    base = bottom_quarter(mesh)
    u0 = solve_elasticity(mesh, lam, mu, weight, tags=base)
    p0 = solve_elasticity_adjoint(mesh, lam, mu, u0, objective, tags=base)
    J0 = evaluate_objective(objective, u0)
    predicted = float(elast_dirichlet_2d(trace_at(u0, 0.0), trace_at(p0, 0.0), mu, nu))

    def J(eps: float) -> float:
        u = solve_elasticity(mesh, lam, mu, weight, tags=base | around_start(mesh, eps))
        return evaluate_objective(objective, u)

    values = _map(J, list(eps_values), executor)
    fitted = fit_log_law(eps_values, [value - J0 for value in values])
    logger.info(f"Elasticity log law: fitted {fitted:.5g}, predicted {predicted:.5g}")
    return SweepResult("elasticity_log_law", list(eps_values), values, J0, predicted, fitted)
