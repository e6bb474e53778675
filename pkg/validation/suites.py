"""
Acceptance suites: named checks over every package, each returning CheckResult rows.
"""
import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence
import numpy as np
from bem.kernels import half_space_surface_displacement, kernel_eval, mindlin3d
from bem.sweep import equilibrium_sweep, polarization_study
from fem.conductivity import solve_conductivity_sharp, solve_conductivity_smoothed
from fem.elasticity import plane_stress_lame, solve_elasticity
from fem.fields import FemField, IntervalData
from fem.helmholtz import energy_balance_helmholtz, solve_helmholtz
from fem.objectives import l2_error
from handlers.common import setup
from mesh2d.editing import split_boundary_edge
from mesh2d.generators import disk_arc_labels, gen_disk_domain, gen_screen_disk, gen_square_domain
from optimizer.loop import Optimizer
from optimizer.models import OptConfig
from optimizer.problems import (
    REGION_NEUMANN, ClampProblem, ConductivityProblem, HelmholtzProblem, MixerProblem, Problem, SupportProblem
)
from region.evolution import advect, insert_disk
from region.fitting import fit_mesh_to_region
from region.levelset import area, arcs_to_levelset, circular_distance, extract_interface, redistance
from smoothing.profile import default_profile
from smoothing.robin import robin_coefficient
from utils.constants import EQUILIBRIUM_CENTER, EQUILIBRIUM_INTEGRAL
from utils.errors import SolvabilityError
from validation import oracles
from validation.demos import demo_config

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    value: float
    threshold: float

    def as_row(self) -> tuple:
        return self.suite, self.name, self.passed, self.value, self.threshold

    def as_dict(self) -> dict:
        return {"suite": self.suite, "check": self.name, "passed": self.passed, "value": self.value,
                "threshold": self.threshold}


def at_most(suite: str, name: str, value: float, threshold: float) -> CheckResult:
    value = float(value)
    return CheckResult(suite, name, bool(math.isfinite(value) and value <= threshold), value, float(threshold))


def at_least(suite: str, name: str, value: float, threshold: float) -> CheckResult:
    value = float(value)
    return CheckResult(suite, name, bool(math.isfinite(value) and value >= threshold), value, float(threshold))


# ==================== REGION ====================

def random_arcs(rng: np.random.Generator, perimeter: float, min_length: float) -> List[tuple]:
    """One to three disjoint arcs, each at least min_length long and apart."""
    count = int(rng.integers(1, 4))
    cuts = np.sort(rng.uniform(0.0, perimeter, 2 * count))
    gaps = np.diff(np.append(cuts, cuts[0] + perimeter))
    if gaps.min() < min_length:
        cuts = np.linspace(0.0, perimeter, 2 * count, endpoint=False) + rng.uniform(0.0, perimeter / (2 * count))
    return [(cuts[2 * k], cuts[2 * k + 1]) for k in range(count)]


def region_suite(samples: int = 100, seed: int = 7, executor: Optional[Executor] = None) -> List[CheckResult]:
    mesh = gen_disk_domain(1.0, 128, 0.2)
    perimeter = mesh.loop_perimeter(0)
    mean_edge = perimeter / 128
    rng = np.random.default_rng(seed)

    idempotence, monotonicity, complement, reverse = 0.0, 0.0, 0.0, 0.0
    for _ in range(samples):
        ls = arcs_to_levelset(mesh, random_arcs(rng, perimeter, 10 * mean_edge))
        once = redistance(ls)
        idempotence = max(idempotence, float(np.abs(redistance(once).phi - once.phi).max()) / perimeter)

        inserted = insert_disk(ls, float(rng.uniform(0.0, perimeter)), float(rng.uniform(0.02, 0.2)))
        monotonicity = max(monotonicity, float((inserted.phi - ls.phi).max()) / perimeter)

        other = redistance(ls.with_phi(-ls.phi))
        complement = max(complement, abs(area(ls) + area(other) - perimeter) / perimeter)

        velocity = np.ones_like(ls.phi)
        tau = perimeter / 20
        back = advect(advect(ls, velocity, tau), -velocity, tau)
        before = np.array([p.s for p in extract_interface(ls)])
        after = np.array([p.s for p in extract_interface(back)])
        if len(before) != len(after):
            reverse = math.inf
            continue
        gaps = circular_distance(before[:, None], after[None, :], perimeter).min(axis=1)
        reverse = max(reverse, float(gaps.max()) / mean_edge)

    return [
        at_most("region", "redistance_idempotent", idempotence, 1e-12),
        at_most("region", "insertion_min_monotone", monotonicity, 1e-12),
        at_most("region", "area_complement", complement, 1e-10),
        at_most("region", "advect_reverse_edges", reverse, 4.0),
    ]


# ==================== MESH ====================

def _audit_passes(mesh) -> float:
    mesh.audit()
    return 0.0


def mesh_suite(executor: Optional[Executor] = None) -> List[CheckResult]:
    disk = gen_disk_domain(1.0, 64, 0.1)
    square = gen_square_domain(1.0, 0.125)
    graded = gen_disk_domain(1.0, 64, 0.1, focus_angle=0.5 * math.pi, h_min=1e-4, exact_arcs=[1e-3])
    screen = gen_screen_disk(10)

    edge = int(disk.loop_edge_ids(0)[5])
    split = split_boundary_edge(disk, edge, 0.5)
    polygon = 32 * math.sin(2 * math.pi / 64)

    return [
        at_most("mesh", "disk_audit", _audit_passes(disk), 0.0),
        at_most("mesh", "square_audit", _audit_passes(square), 0.0),
        at_most("mesh", "graded_audit", _audit_passes(graded), 0.0),
        at_most("mesh", "screen_audit", _audit_passes(screen), 0.0),
        at_most("mesh", "disk_area_matches_polygon", abs(disk.total_area - polygon) / polygon, 1e-10),
        at_most("mesh", "square_area", abs(square.total_area - 1.0), 1e-12),
        at_most("mesh", "split_keeps_area", abs(split.total_area - disk.total_area) / disk.total_area, 1e-12),
        at_most("mesh", "split_audit", _audit_passes(split), 0.0),
        at_most("mesh", "screen_area", abs(screen.areas.sum() - math.pi) / math.pi, 0.01),
    ]


# ==================== FEM ====================

def _bubble(points: np.ndarray) -> np.ndarray:
    x, y = points[..., 0], points[..., 1]
    return x * (1 - x) * y * (1 - y)


def _bubble_laplacian(points: np.ndarray) -> np.ndarray:
    x, y = points[..., 0], points[..., 1]
    return -2.0 * (y * (1 - y) + x * (1 - x))


def _bubble_flux(side: int) -> Callable[[np.ndarray], np.ndarray]:
    """Outward normal derivative of the bubble on one side of the unit square (1 bottom .. 4 left)."""
    def flux(points: np.ndarray) -> np.ndarray:
        x, y = points[..., 0], points[..., 1]
        dx, dy = (1 - 2 * x) * y * (1 - y), x * (1 - x) * (1 - 2 * y)
        return {1: -dy, 2: dx, 3: dy, 4: -dx}[side]
    return flux


def _orders(errors: Sequence[float]) -> List[float]:
    return [math.log2(coarse / fine) for coarse, fine in zip(errors, errors[1:])]


def conductivity_errors(sizes: Sequence[float]) -> List[float]:
    errors = []
    for h in sizes:
        mesh = gen_square_domain(1.0, h)
        tags = np.ones(mesh.n_boundary_edges, dtype=bool)
        u = solve_conductivity_sharp(mesh, 1.0, lambda p: -_bubble_laplacian(p), None, tags)
        errors.append(l2_error(u, _bubble))
    return errors


def helmholtz_errors(sizes: Sequence[float], k: float = 1.0) -> List[float]:
    """Neumann data of the bubble on every side, k^2 well below the first eigenvalue."""
    errors = []
    for h in sizes:
        mesh = gen_square_domain(1.0, h, (1, 2, 3, 4))
        g = {side: _bubble_flux(side) for side in (1, 2, 3, 4)}
        u = solve_helmholtz(mesh, 1.0, k, 1.0, lambda p: -_bubble_laplacian(p) - k ** 2 * _bubble(p), None, g)
        errors.append(l2_error(u, _bubble))
    return errors


def elasticity_errors(sizes: Sequence[float], E: float = 1.0, nu: float = 0.3) -> List[float]:
    """Clamped square with u = (b, b) for the bubble b."""
    lam, mu = plane_stress_lame(E, nu)

    def force(points: np.ndarray) -> np.ndarray:
        x, y = points[..., 0], points[..., 1]
        bxx, byy, bxy = -2 * y * (1 - y), -2 * x * (1 - x), (1 - 2 * x) * (1 - 2 * y)
        laplacian = bxx + byy
        return -np.stack([mu * laplacian + (lam + mu) * (bxx + bxy), mu * laplacian + (lam + mu) * (bxy + byy)],
                         axis=-1)

    errors = []
    for h in sizes:
        mesh = gen_square_domain(1.0, h)
        tags = np.ones(mesh.n_boundary_edges, dtype=bool)
        u = solve_elasticity(mesh, lam, mu, force, tags=tags)
        errors.append(l2_error(u, lambda p: np.stack([_bubble(p), _bubble(p)], axis=-1)))
    return errors


def fem_suite(sizes: Sequence[float] = (1 / 8, 1 / 16, 1 / 32), executor: Optional[Executor] = None) -> List[CheckResult]:
    results = []
    for name, errors in (("conductivity", conductivity_errors(sizes)), ("helmholtz", helmholtz_errors(sizes)),
                         ("elasticity", elasticity_errors(sizes))):
        order = _orders(errors)[-1]
        results.append(at_most("fem", f"{name}_l2_order", abs(order - 2.0), 0.3))
    return results


# ==================== SMOOTHING ====================

def smoothing_errors(eps_values: Sequence[float] = (0.1, 0.05, 0.025)) -> List[float]:
    """||u_eps - u_sharp||_L2 on one mesh fitted to the bottom half of the unit disk."""
    base = gen_disk_domain(1.0, 256, 0.05)
    perimeter = base.loop_perimeter(0)
    fitted = fit_mesh_to_region(base, arcs_to_levelset(base, [(0.5 * perimeter, perimeter)]))
    mesh = fitted.mesh
    sharp = solve_conductivity_sharp(mesh, 1.0, 1.0, None, fitted.tags)
    errors = []
    for eps in eps_values:
        smoothed = solve_conductivity_smoothed(mesh, 1.0, 1.0, None, robin_coefficient(fitted.levelset, eps))
        difference = FemField(mesh, smoothed.values - sharp.values, smoothed.model)
        errors.append(l2_error(difference, 0.0))
    return errors


def smoothing_suite(executor: Optional[Executor] = None) -> List[CheckResult]:
    profile = default_profile()
    ends = max(abs(float(profile(-1.0)) - 1.0), abs(float(profile(1.0))), abs(float(profile(0.0)) - 0.5))
    errors = smoothing_errors()
    growth = max(fine - coarse for coarse, fine in zip(errors, errors[1:]))
    return [
        at_most("smoothing", "profile_values", ends, 1e-15),
        at_most("smoothing", "consistency_non_increasing", growth, 0.0),
    ]


# ==================== SHAPE DERIVATIVES ====================

def finite_difference_error(problem: Problem, arcs: Sequence[Sequence[tuple]], index: int = 0,
                            step_fraction: float = 1e-4) -> float:
    """
    Largest relative gap between shape-gradient values and central differences of J_tot.

    Every endpoint of region index is moved along its outward conormal by
    +-step_fraction * perimeter while the others stay fixed.
    """
    mesh = problem.mesh
    perimeter = mesh.loop_perimeter(0)
    delta = step_fraction * perimeter

    def regions(changed):
        return [arcs_to_levelset(mesh, changed if k == index else region) for k, region in enumerate(arcs)]

    evaluation = problem.evaluate(regions(arcs[index]))
    gradient = problem.shape_gradient(evaluation, index)
    worst = 0.0
    for k, (start, end) in enumerate(arcs[index]):
        for position, outward in ((start, -1.0), (end, 1.0)):
            values = []
            for sign in (1.0, -1.0):
                moved = list(arcs[index])
                shift = sign * outward * delta
                moved[k] = (start + shift, end) if position == start else (start, end + shift)
                values.append(problem.evaluate(regions(moved)).J_tot)
            fd = (values[0] - values[1]) / (2.0 * delta)
            hits = [j for j, point in enumerate(gradient.interface)
                    if circular_distance(point.s, position % perimeter, perimeter) < 1e-9]
            analytic = float(gradient.values[hits[0]])
            worst = max(worst, abs(analytic - fd) / max(abs(fd), 1e-12))
    return worst


def shape_problems(mode: str, n_boundary: int = 128, target_h: float = 0.1):
    """Cases (name, problem, arcs, index) with smoothed regions and with sharp regions, for one gradient mode."""
    labelled = gen_disk_domain(1.0, n_boundary, target_h, label_fn=disk_arc_labels(-0.5 * math.pi, 0.4))
    disk = gen_disk_domain(1.0, n_boundary, target_h)
    config = OptConfig("conductivity", eps_smooth=0.2, shape_gradient_mode=mode)
    G = [[(1.0, 2.0)]]
    return [
        ("conductivity_dirichlet", ConductivityProblem(disk, config), G, 0),
        ("mixer_cathode", MixerProblem(disk, config.with_overrides(problem="mixer")),
         [[(1.0, 2.0)], [(3.5, 4.5)]], 0),
        ("mixer_anode", MixerProblem(disk, config.with_overrides(problem="mixer")),
         [[(1.0, 2.0)], [(3.5, 4.5)]], 1),
        ("elastic_support", SupportProblem(disk, config.with_overrides(problem="elasticity-support"), f=(0.0, -1.0)),
         G, 0),
    ], [
        ("neumann_region", ConductivityProblem(labelled, config, kind=REGION_NEUMANN, dirichlet_label=1), G, 0),
        ("helmholtz_impedance", HelmholtzProblem(disk, config.with_overrides(problem="helmholtz"), k=2.0), G, 0),
        ("clamp_load", ClampProblem(labelled, config.with_overrides(problem="clamp"), clamp_label=1), G, 0),
    ]


def shape_suite(executor: Optional[Executor] = None) -> List[CheckResult]:
    smoothed, exact = shape_problems("integral")
    collapsed, _ = shape_problems("collapsed")
    cases = smoothed + exact + [(f"{name}_collapsed", problem, arcs, index) for name, problem, arcs, index in collapsed]
    return [at_most("shape", name, finite_difference_error(problem, arcs, index), 1e-2)
            for name, problem, arcs, index in cases]


# ==================== TOPOLOGICAL ORACLES ====================

def topo2d_suite(executor: Optional[Executor] = None) -> List[CheckResult]:
    log_law = oracles.conductivity_log_law(executor=executor)
    inhom = oracles.dirichlet_inhom_log_law(executor=executor)
    cathode = oracles.mixer_cathode_log_law(executor=executor)
    anode = oracles.mixer_anode_log_law(executor=executor)
    linear = oracles.neumann_linear_law(executor=executor)
    return [
        at_most("topo2d", "dirichlet_log_law", log_law.relative_error, 0.15),
        at_most("topo2d", "dirichlet_inhom_log_law", inhom.relative_error, 0.15),
        at_most("topo2d", "mixer_cathode_log_law", cathode.relative_error, 0.15),
        at_most("topo2d", "mixer_anode_log_law", anode.relative_error, 0.15),
        at_most("topo2d", "neumann_linear_law", linear.relative_error, 0.05),
    ]


def helmholtz_suite(executor: Optional[Executor] = None) -> List[CheckResult]:
    law = oracles.helmholtz_insertion_law(executor=executor)
    mesh = gen_square_domain(1.0, 1 / 16)
    impedance = IntervalData(((2.0, 3.0),))
    u = solve_helmholtz(mesh, 1.0, 3.0, 1.0, 1.0, impedance)
    absorbed, supplied = energy_balance_helmholtz(u, 3.0, 1.0, 1.0, impedance)
    return [
        at_most("helmholtz", "impedance_insertion_law", law.relative_error, 0.10),
        at_most("helmholtz", "energy_balance", abs(absorbed - supplied) / abs(supplied), 1e-8),
    ]


def elastic_suite(executor: Optional[Executor] = None) -> List[CheckResult]:
    law = oracles.elasticity_log_law(executor=executor)
    mesh = gen_square_domain(1.0, 0.25)
    lam, mu = plane_stress_lame(1.0, 0.3)
    try:
        solve_elasticity(mesh, lam, mu, (0.0, -1.0))
        rigid = 1.0
    except SolvabilityError:
        rigid = 0.0
    return [
        at_most("elastic", "clamped_log_law", law.relative_error, 0.20),
        at_most("elastic", "rigid_modes_detected", rigid, 0.0),
    ]


# ==================== BEM ====================

def mindlin_surface_error(mu: float = 1.0, nu: float = 0.3) -> float:
    """Mindlin kernel against the closed-form surface displacements of point loads."""
    kernel = mindlin3d(mu, nu)
    x = np.array([0.1, -0.2, 0.0])
    worst = 0.0
    for y in (np.array([0.7, 0.3, 0.0]), np.array([-0.4, 0.5, 0.0])):
        L = kernel_eval(kernel, x, y)
        for load in np.eye(3):
            exact = half_space_surface_displacement(mu, nu, load, x, y)
            worst = max(worst, float(np.abs(L.T @ load - exact).max() / np.abs(exact).max()))
    return worst


def bem_suite(executor: Optional[Executor] = None) -> List[CheckResult]:
    (fine,) = equilibrium_sweep([0.04], [1e-5], executor=executor)
    grid = equilibrium_sweep([0.2, 0.1, 0.05], [1e-5, 1e-4, 1e-3], executor=executor)

    by_h: Dict[float, list] = {}
    for row in grid:
        by_h.setdefault(row.h, []).append(row)
    best = [min(rows, key=lambda row: row.E) for _, rows in sorted(by_h.items(), reverse=True)]
    r_growth = max(b.R - a.R for a, b in zip(best, best[1:]))
    e_growth = max(b.E - a.E for a, b in zip(best, best[1:]))

    return [
        at_most("bem", "equilibrium_integral", abs(fine.integral - EQUILIBRIUM_INTEGRAL), 0.4),
        at_most("bem", "equilibrium_center", abs(fine.center - EQUILIBRIUM_CENTER) / EQUILIBRIUM_CENTER, 0.05),
        at_most("bem", "residual_non_increasing", r_growth, 0.0),
        at_most("bem", "interior_error_non_increasing", e_growth, 0.0),
        at_most("bem", "mindlin_surface", mindlin_surface_error(), 1e-12),
    ]


def polarization_suite(executor: Optional[Executor] = None) -> List[CheckResult]:
    tensors, changes = polarization_study([0.05, 0.04], 67.5676, 0.48, executor=executor)
    M = tensors[-1]
    return [
        at_most("polarization", "symmetry", M.symmetry_defect, 0.01),
        at_most("polarization", "off_diagonal", M.coupling_defect, 0.01),
        at_most("polarization", "in_plane_isotropy", M.isotropy_defect, 0.01),
        at_least("polarization", "diagonal_positive", float(np.diag(M.M).min()), 0.0),
        at_most("polarization", "self_convergence", changes[-1], 0.03),
    ]


# ==================== OPTIMIZER ====================

def demo_history(name: str):
    context = setup(demo_config(name))
    _, history = Optimizer(context.problem).run(context.regions)
    return history


def optimizer_suite(executor: Optional[Executor] = None) -> List[CheckResult]:
    supports = demo_history("supports2d")
    mixer = demo_history("mixer2d")
    first, last = mixer.records[0].J, mixer.last.J
    return [
        at_most("optimizer", "supports2d_monotone", len(supports.monotone_violations()), 0),
        at_most("optimizer", "mixer2d_monotone", len(mixer.monotone_violations()), 0),
        at_least("optimizer", "mixer2d_decrease", (first - last) / abs(first), 0.20),
    ]


SUITES: Dict[str, Callable[..., List[CheckResult]]] = {
    "region": region_suite,
    "mesh": mesh_suite,
    "fem": fem_suite,
    "smoothing": smoothing_suite,
    "shape": shape_suite,
    "topo2d": topo2d_suite,
    "helmholtz": helmholtz_suite,
    "elastic": elastic_suite,
    "bem": bem_suite,
    "polarization": polarization_suite,
    "optimizer": optimizer_suite,
}


def run_suites(names: Sequence[str], executor: Optional[Executor] = None) -> List[CheckResult]:
    """Run suites in order; 'all' expands to every suite."""
    if "all" in names:
        names = list(SUITES)
    results = []
    for name in names:
        logger.info(f"Running validation suite '{name}'")
        results.extend(SUITES[name](executor=executor))
    return results
