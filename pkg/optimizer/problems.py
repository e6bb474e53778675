"""
Optimization problems: state and adjoint models of boundary regions.

Every problem evaluates its penalized objective on the base mesh, where the
smoothed Robin coefficients and interval data are smooth functions of the
level sets, and computes topological fields from sharp solves on a mesh
fitted to the current regions.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple
import numpy as np
from derivatives.shape import (
    ShapeGradient, area_penalty, clamp_load, combine, contour_penalty_2d, dirichlet_smoothed,
    dirichlet_smoothed_integral, elastic_support, elastic_support_integral, helmholtz_impedance, mixer_two_region,
    mixer_two_region_integral, neumann_inhom
)
from derivatives.topological import TopoField, topo_field
from fem.conductivity import solve_conductivity_adjoint, solve_conductivity_sharp, solve_conductivity_smoothed
from fem.elasticity import plane_stress_lame, solve_elasticity, solve_elasticity_adjoint
from fem.fields import FemField, IntervalData, Objective
from fem.helmholtz import solve_helmholtz, solve_helmholtz_adjoint
from fem.objectives import evaluate_objective
from mesh2d.mesh import Mesh2D
from optimizer.models import OptConfig, penalized_objective
from region.fitting import FittedRegion, fit_mesh_to_region
from region.levelset import BoundaryLevelSet, area, cont, extract_interface, transfer
from smoothing.robin import RobinCoefficient, robin_coefficient
from utils.constants import (
    PROBLEM_CLAMP, PROBLEM_CONDUCTIVITY, PROBLEM_HELMHOLTZ, PROBLEM_MIXER, PROBLEM_SUPPORT, ROBIN_CAP_NUMERATOR
)
from utils.errors import ConsistencyError, ValidationError
from utils.validators import validate_choice, validate_poisson_ratio, validate_positive

logger = logging.getLogger(__name__)

REGION_DIRICHLET = "dirichlet"
REGION_NEUMANN = "neumann"


@dataclass(eq=False)
class Evaluation:
    """Penalized objective of a set of regions and the states behind it."""
    regions: Tuple[BoundaryLevelSet, ...]
    J: float
    area: float
    cont: int
    J_tot: float
    state: FemField
    data: Dict[str, Any] = field(default_factory=dict)

    @property
    def interfaces(self) -> int:
        """Number of connected arcs over all regions."""
        return self.cont // 2


def fit_regions(mesh: Mesh2D, regions: Sequence[BoundaryLevelSet]) -> Tuple[Mesh2D, List[FittedRegion]]:
    """
    One mesh fitted to several regions of the same loop.

    Regions are fitted in turn, then re-tagged on the final mesh so that
    every FittedRegion shares it.
    """
    fitted_mesh = mesh
    for ls in regions:
        fitted_mesh = fit_mesh_to_region(fitted_mesh, transfer(ls, fitted_mesh)).mesh
    fitted = [fit_mesh_to_region(fitted_mesh, transfer(ls, fitted_mesh)) for ls in regions]
    if any(item.mesh is not fitted_mesh for item in fitted):
        raise ConsistencyError("Fitting a region split edges of an already fitted mesh")
    return fitted_mesh, fitted


class Problem:
    """
    Shared plumbing of the optimization problems.

    Subclasses implement evaluate, shape_gradient and topo_fields; region
    names fix the order of the level sets they expect.
    """
    name = ""
    regions: Tuple[str, ...] = ("G",)

    def __init__(self, mesh: Mesh2D, config: OptConfig, objective: Objective):
        self.mesh = mesh
        self.config = config
        self.objective = objective
        self.cap = ROBIN_CAP_NUMERATOR / mesh.diameter

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    def check_regions(self, regions: Sequence[BoundaryLevelSet]) -> Tuple[BoundaryLevelSet, ...]:
        if len(regions) != self.n_regions:
            raise ValidationError(f"Problem '{self.name}' needs {self.n_regions} regions, got {len(regions)}",
                                  "regions")
        for ls in regions:
            ls.check_mesh(self.mesh)
        return tuple(regions)

    def robin(self, ls: BoundaryLevelSet) -> RobinCoefficient:
        return robin_coefficient(ls, self.config.eps_smooth, prefactor=self.config.robin_prefactor, cap=self.cap)

    def penalized(self, regions: Sequence[BoundaryLevelSet], J: float, state: FemField, **data) -> Evaluation:
        total_area = sum(area(ls) for ls in regions)
        total_cont = sum(cont(ls) for ls in regions)
        J_tot = penalized_objective(J, total_area, total_cont, self.config.ell, self.config.m)
        return Evaluation(tuple(regions), float(J), total_area, total_cont, J_tot, state, dict(data))

    def with_penalties(self, gradient: ShapeGradient) -> ShapeGradient:
        """Add the area and contour terms on the gradient's interface."""
        interface = list(gradient.interface)
        return combine([
            gradient,
            area_penalty(self.config.ell, interface),
            contour_penalty_2d(self.config.m, interface, self.mesh),
        ])

    @property
    def integral_mode(self) -> bool:
        return self.config.shape_gradient_mode == "integral"

    def evaluate(self, regions: Sequence[BoundaryLevelSet]) -> Evaluation:
        raise NotImplementedError

    def adjoint(self, evaluation: Evaluation) -> FemField:
        """Adjoint state of an evaluation, solved once and kept on it."""
        if "adjoint" not in evaluation.data:
            evaluation.data["adjoint"] = self.solve_adjoint(evaluation)
        return evaluation.data["adjoint"]

    def solve_adjoint(self, evaluation: Evaluation) -> FemField:
        raise NotImplementedError

    def shape_gradient(self, evaluation: Evaluation, index: int = 0) -> ShapeGradient:
        raise NotImplementedError

    def topo_fields(self, regions: Sequence[BoundaryLevelSet], delta_excl: float) -> List[Optional[TopoField]]:
        raise NotImplementedError


# ==================== CONDUCTIVITY ====================

class ConductivityProblem(Problem):
    """
    Conductivity with a free region G on the boundary.

    kind "dirichlet": u = 0 on G (Robin-smoothed); kind "neumann": flux
    g_region on G. Edges labelled dirichlet_label carry u = 0 in both cases.
    """
    name = PROBLEM_CONDUCTIVITY

    def __init__(self, mesh: Mesh2D, config: OptConfig, objective: Objective = None, gamma: Any = 1.0,
                 f: Any = 1.0, g: Any = None, kind: str = REGION_DIRICHLET, g_region: float = 1.0,
                 dirichlet_label: Optional[int] = None):
        super().__init__(mesh, config, objective or Objective.u2())
        self.gamma = gamma
        self.f = f
        self.g = g
        self.kind = validate_choice(kind, "region kind", [REGION_DIRICHLET, REGION_NEUMANN])
        self.g_region = float(g_region)
        self.dirichlet_label = dirichlet_label

    def fixed_tags(self, mesh: Mesh2D) -> Optional[np.ndarray]:
        if self.dirichlet_label is None:
            return None
        return mesh.edge_labels == int(self.dirichlet_label)

    def _flux(self, ls: BoundaryLevelSet):
        if self.kind == REGION_DIRICHLET:
            return self.g
        region_flux = IntervalData.from_levelset(ls, self.g_region)
        return region_flux if self.g is None else [self.g, region_flux]

    def evaluate(self, regions: Sequence[BoundaryLevelSet]) -> Evaluation:
        (ls,) = self.check_regions(regions)
        tags = self.fixed_tags(self.mesh)
        robin = self.robin(ls) if self.kind == REGION_DIRICHLET else None
        if tags is None:
            u = solve_conductivity_smoothed(self.mesh, self.gamma, self.f, self._flux(ls), robin)
        else:
            u = solve_conductivity_sharp(self.mesh, self.gamma, self.f, self._flux(ls), tags, 0.0, robin)
        J = evaluate_objective(self.objective, u)
        return self.penalized(regions, J, u, robin=robin)

    def solve_adjoint(self, evaluation: Evaluation) -> FemField:
        return solve_conductivity_adjoint(self.mesh, self.gamma, evaluation.state, self.objective,
                                          evaluation.data["robin"], self.fixed_tags(self.mesh))

    def shape_gradient(self, evaluation: Evaluation, index: int = 0) -> ShapeGradient:
        u = evaluation.state
        robin = evaluation.data["robin"]
        p = self.adjoint(evaluation)
        if self.kind == REGION_NEUMANN:
            (ls,) = evaluation.regions
            gradient = neumann_inhom(self.g_region, p, extract_interface(ls), ls.loop_ref)
        elif self.integral_mode:
            gradient = dirichlet_smoothed_integral(u, p, robin)
        else:
            gradient = dirichlet_smoothed(u, p, robin)
        return self.with_penalties(gradient)

    def topo_fields(self, regions: Sequence[BoundaryLevelSet], delta_excl: float) -> List[Optional[TopoField]]:
        (ls,) = self.check_regions(regions)
        mesh, (fitted,) = fit_regions(self.mesh, [ls])
        fixed = self.fixed_tags(mesh)
        if self.kind == REGION_DIRICHLET:
            tags = fitted.tags if fixed is None else fitted.tags | fixed
            u0 = solve_conductivity_sharp(mesh, self.gamma, self.f, self.g, tags)
            p0 = solve_conductivity_adjoint(mesh, self.gamma, u0, self.objective, tags=tags)
            return [topo_field("conduc_dirichlet_hom", mesh, fitted.levelset, u0, p0, delta_excl, gamma=self.gamma)]
        flux = IntervalData.from_levelset(fitted.levelset, self.g_region)
        flux = flux if self.g is None else [self.g, flux]
        u0 = solve_conductivity_sharp(mesh, self.gamma, self.f, flux, fixed)
        p0 = solve_conductivity_adjoint(mesh, self.gamma, u0, self.objective, tags=fixed)
        return [topo_field("conduc_neumann_inhom", mesh, fitted.levelset, u0, p0, delta_excl, g=self.g_region)]


# ==================== ELECTRODES ====================

class MixerProblem(Problem):
    """
    Two electrodes on one boundary: a cathode (u = 0) and an anode (u = u_in).

    The default objective -int gamma |grad u|^2 rewards strong fields.
    """
    name = PROBLEM_MIXER
    regions = ("cathode", "anode")

    def __init__(self, mesh: Mesh2D, config: OptConfig, objective: Objective = None, gamma: float = 1.0,
                 f: Any = 0.0, u_in: float = 1.0):
        gamma = validate_positive(gamma, "gamma")
        super().__init__(mesh, config, objective or Objective.neg_energy(gamma))
        self.gamma = gamma
        self.f = f
        self.u_in = float(u_in)

    def evaluate(self, regions: Sequence[BoundaryLevelSet]) -> Evaluation:
        cathode_ls, anode_ls = self.check_regions(regions)
        cathode, anode = self.robin(cathode_ls), self.robin(anode_ls)
        flux = self.u_in * anode.edge_values(self.mesh)
        u = solve_conductivity_smoothed(self.mesh, self.gamma, self.f, flux, [cathode, anode])
        J = evaluate_objective(self.objective, u)
        return self.penalized(regions, J, u, cathode=cathode, anode=anode)

    def solve_adjoint(self, evaluation: Evaluation) -> FemField:
        robins = [evaluation.data["cathode"], evaluation.data["anode"]]
        return solve_conductivity_adjoint(self.mesh, self.gamma, evaluation.state, self.objective, robins)

    def shape_gradient(self, evaluation: Evaluation, index: int = 0) -> ShapeGradient:
        u = evaluation.state
        cathode, anode = evaluation.data["cathode"], evaluation.data["anode"]
        p = self.adjoint(evaluation)
        pair = mixer_two_region_integral if self.integral_mode else mixer_two_region
        return self.with_penalties(pair(u, p, self.u_in, cathode, anode)[index])

    def topo_fields(self, regions: Sequence[BoundaryLevelSet], delta_excl: float) -> List[Optional[TopoField]]:
        regions = self.check_regions(regions)
        mesh, (cathode, anode) = fit_regions(self.mesh, regions)
        tags = cathode.tags | anode.tags
        values = np.zeros(mesh.n_vertices)
        values[np.unique(mesh.boundary_edges[anode.tags])] = self.u_in
        u0 = solve_conductivity_sharp(mesh, self.gamma, self.f, None, tags, values)
        p0 = solve_conductivity_adjoint(mesh, self.gamma, u0, self.objective, tags=tags)
        return [
            topo_field("mixer_cathode", mesh, cathode.levelset, u0, p0, delta_excl, [anode.levelset],
                       gamma=self.gamma),
            topo_field("mixer_anode", mesh, anode.levelset, u0, p0, delta_excl, [cathode.levelset],
                       gamma=self.gamma, u_in=self.u_in),
        ]


# ==================== HELMHOLTZ ====================

class HelmholtzProblem(Problem):
    """Interior Helmholtz model with an absorbing impedance region G."""
    name = PROBLEM_HELMHOLTZ

    def __init__(self, mesh: Mesh2D, config: OptConfig, objective: Objective = None, gamma: Any = 1.0,
                 k: float = 1.0, Z: float = 1.0, f: Any = 1.0, g: Any = None):
        super().__init__(mesh, config, objective or Objective.abs2())
        self.gamma = gamma
        self.k = validate_positive(k, "k")
        self.Z = validate_positive(Z, "Z")
        self.f = f
        self.g = g

    def evaluate(self, regions: Sequence[BoundaryLevelSet]) -> Evaluation:
        (ls,) = self.check_regions(regions)
        impedance = IntervalData.from_levelset(ls)
        u = solve_helmholtz(self.mesh, self.gamma, self.k, self.Z, self.f, impedance, self.g)
        J = evaluate_objective(self.objective, u)
        return self.penalized(regions, J, u, impedance=impedance)

    def solve_adjoint(self, evaluation: Evaluation) -> FemField:
        return solve_helmholtz_adjoint(self.mesh, self.gamma, self.k, self.Z, evaluation.state, self.objective,
                                       evaluation.data["impedance"])

    def shape_gradient(self, evaluation: Evaluation, index: int = 0) -> ShapeGradient:
        u = evaluation.state
        (ls,) = evaluation.regions
        p = self.adjoint(evaluation)
        gradient = helmholtz_impedance(u, p, self.k, self.Z, extract_interface(ls), ls.loop_ref)
        return self.with_penalties(gradient)

    def topo_fields(self, regions: Sequence[BoundaryLevelSet], delta_excl: float) -> List[Optional[TopoField]]:
        (ls,) = self.check_regions(regions)
        mesh, (fitted,) = fit_regions(self.mesh, [ls])
        u0 = solve_helmholtz(mesh, self.gamma, self.k, self.Z, self.f, fitted.tags, self.g)
        p0 = solve_helmholtz_adjoint(mesh, self.gamma, self.k, self.Z, u0, self.objective, fitted.tags)
        return [topo_field("helmholtz_impedance", mesh, fitted.levelset, u0, p0, delta_excl, k=self.k, Z=self.Z)]


# ==================== ELASTICITY ====================

class _PlaneStressProblem(Problem):
    def __init__(self, mesh: Mesh2D, config: OptConfig, objective: Objective, E: float, nu: float,
                 f: Any, g: Any):
        super().__init__(mesh, config, objective or Objective.u2())
        self.nu = validate_poisson_ratio(nu)
        self.lam, self.mu = plane_stress_lame(E, self.nu)
        self.f = f
        self.g = g


class SupportProblem(_PlaneStressProblem):
    """Plate held by a smoothed clamped support G and loaded by f and the tractions g."""
    name = PROBLEM_SUPPORT

    def __init__(self, mesh: Mesh2D, config: OptConfig, objective: Objective = None, E: float = 1.0,
                 nu: float = 0.3, f: Any = None, g: Any = None):
        super().__init__(mesh, config, objective, E, nu, f, g)

    def evaluate(self, regions: Sequence[BoundaryLevelSet]) -> Evaluation:
        (ls,) = self.check_regions(regions)
        robin = self.robin(ls)
        u = solve_elasticity(self.mesh, self.lam, self.mu, self.f, self.g, robin)
        J = evaluate_objective(self.objective, u)
        return self.penalized(regions, J, u, robin=robin)

    def solve_adjoint(self, evaluation: Evaluation) -> FemField:
        return solve_elasticity_adjoint(self.mesh, self.lam, self.mu, evaluation.state, self.objective,
                                        evaluation.data["robin"])

    def shape_gradient(self, evaluation: Evaluation, index: int = 0) -> ShapeGradient:
        u = evaluation.state
        robin = evaluation.data["robin"]
        p = self.adjoint(evaluation)
        variant = elastic_support_integral if self.integral_mode else elastic_support
        return self.with_penalties(variant(u, p, robin))

    def topo_fields(self, regions: Sequence[BoundaryLevelSet], delta_excl: float) -> List[Optional[TopoField]]:
        (ls,) = self.check_regions(regions)
        mesh, (fitted,) = fit_regions(self.mesh, [ls])
        u0 = solve_elasticity(mesh, self.lam, self.mu, self.f, self.g, tags=fitted.tags)
        p0 = solve_elasticity_adjoint(mesh, self.lam, self.mu, u0, self.objective, tags=fitted.tags)
        return [topo_field("elast_dirichlet_2d", mesh, fitted.levelset, u0, p0, delta_excl, mu=self.mu, nu=self.nu)]


class ClampProblem(_PlaneStressProblem):
    """Plate clamped on the edges labelled clamp_label, loaded by a normal pressure on G."""
    name = PROBLEM_CLAMP

    def __init__(self, mesh: Mesh2D, config: OptConfig, objective: Objective = None, E: float = 1.0,
                 nu: float = 0.3, pressure: float = 1.0, clamp_label: int = 1, f: Any = None, g: Any = None):
        super().__init__(mesh, config, objective, E, nu, f, g)
        self.pressure = float(pressure)
        self.clamp_label = int(clamp_label)
        if not np.any(mesh.edge_labels == self.clamp_label):
            raise ValidationError(f"No boundary edge carries the clamp label {clamp_label}", "clamp_label")

    def _load(self, ls: BoundaryLevelSet):
        region = IntervalData.from_levelset(ls, self.pressure, along_normal=True)
        return region if self.g is None else [self.g, region]

    def evaluate(self, regions: Sequence[BoundaryLevelSet]) -> Evaluation:
        (ls,) = self.check_regions(regions)
        tags = self.mesh.edge_labels == self.clamp_label
        u = solve_elasticity(self.mesh, self.lam, self.mu, self.f, self._load(ls), tags=tags)
        J = evaluate_objective(self.objective, u)
        return self.penalized(regions, J, u)

    def solve_adjoint(self, evaluation: Evaluation) -> FemField:
        tags = self.mesh.edge_labels == self.clamp_label
        return solve_elasticity_adjoint(self.mesh, self.lam, self.mu, evaluation.state, self.objective, tags=tags)

    def shape_gradient(self, evaluation: Evaluation, index: int = 0) -> ShapeGradient:
        (ls,) = evaluation.regions
        p = self.adjoint(evaluation)
        return self.with_penalties(clamp_load(self.pressure, p, extract_interface(ls), ls.loop_ref))

    def topo_fields(self, regions: Sequence[BoundaryLevelSet], delta_excl: float) -> List[Optional[TopoField]]:
        (ls,) = self.check_regions(regions)
        mesh, (fitted,) = fit_regions(self.mesh, [ls])
        tags = mesh.edge_labels == self.clamp_label
        u0 = solve_elasticity(mesh, self.lam, self.mu, self.f, self._load(fitted.levelset), tags=tags)
        p0 = solve_elasticity_adjoint(mesh, self.lam, self.mu, u0, self.objective, tags=tags)
        return [topo_field("clamp_load_2d", mesh, fitted.levelset, None, p0, delta_excl, f=self.pressure)]


PROBLEM_CLASSES = {
    PROBLEM_CONDUCTIVITY: ConductivityProblem,
    PROBLEM_MIXER: MixerProblem,
    PROBLEM_HELMHOLTZ: HelmholtzProblem,
    PROBLEM_SUPPORT: SupportProblem,
    PROBLEM_CLAMP: ClampProblem,
}


def build_problem(mesh: Mesh2D, config: OptConfig, **physics) -> Problem:
    """Instantiate the problem class named by config.problem."""
    return PROBLEM_CLASSES[config.problem](mesh, config, **physics)
