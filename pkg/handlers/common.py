"""
Shared setup of the command handlers: meshes, problems and initial regions from a run configuration.
"""
import asyncio
import functools
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple
import numpy as np
from config import MeshSection, RunConfig, config_hash, expression, load_run_config, parse_run_config
from fem.fields import IntervalData, Objective
from mesh2d.generators import gen_disk_domain, gen_screen_disk, gen_square_domain, n_rings_for_h
from mesh2d.mesh import Mesh2D
from optimizer.problems import Problem, build_problem
from region.levelset import BoundaryLevelSet, arcs_to_levelset, empty_region
from storage.files import ArtifactStore
from utils.constants import (
    LABEL_OPTIMIZABLE, MODEL_CONDUCTIVITY, MODEL_ELASTICITY, MODEL_HELMHOLTZ, PROBLEM_CLAMP, PROBLEM_CONDUCTIVITY,
    PROBLEM_HELMHOLTZ, PROBLEM_MIXER, PROBLEM_SUPPORT
)
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

PROBLEM_MODELS = {
    PROBLEM_CONDUCTIVITY: MODEL_CONDUCTIVITY,
    PROBLEM_MIXER: MODEL_CONDUCTIVITY,
    PROBLEM_HELMHOLTZ: MODEL_HELMHOLTZ,
    PROBLEM_SUPPORT: MODEL_ELASTICITY,
    PROBLEM_CLAMP: MODEL_ELASTICITY,
}


async def in_thread(func: Callable, *args, **kwargs) -> Any:
    """Run blocking numerical work off the event loop."""
    return await asyncio.to_thread(functools.partial(func, *args, **kwargs))


def read_config(path: Optional[str]) -> RunConfig:
    return load_run_config(path) if path else RunConfig()


def with_overrides(run: RunConfig, section: str, **changes) -> RunConfig:
    """Re-validated copy of a config with some fields of one section replaced."""
    changes = {key: value for key, value in changes.items() if value is not None}
    if not changes:
        return run
    document = run.model_dump(mode="json")
    document[section].update(changes)
    return parse_run_config(document)


def open_store(run: RunConfig, args, digest: str = None) -> ArtifactStore:
    directory = getattr(args, "output", None) or run.output_directory()
    return ArtifactStore(directory, digest or config_hash(run), run.output.formats)


# ==================== MESHES ====================

def _fixed_labels(section: MeshSection) -> Optional[Callable[[np.ndarray], np.ndarray]]:
    if not section.fixed:
        return None

    def label(midpoints: np.ndarray) -> np.ndarray:
        out = np.full(len(midpoints), LABEL_OPTIMIZABLE)
        angles = np.arctan2(midpoints[:, 1], midpoints[:, 0])
        for arc in section.fixed:
            delta = np.abs(np.angle(np.exp(1j * (angles - arc.angle))))
            out = np.where(delta * section.size < arc.half_width, arc.label, out)
        return out
    return label


def build_mesh(section: MeshSection):
    """Mesh2D of the disk or square domain, or the DiskSurfaceMesh of the screen."""
    if section.shape == "screen-disk":
        return gen_screen_disk(n_rings_for_h(section.target_h))
    if section.shape == "square":
        return gen_square_domain(section.size, section.target_h, section.side_labels)
    n_boundary = section.n_boundary or max(8, int(round(2.0 * np.pi * section.size / section.target_h)))
    return gen_disk_domain(section.size, n_boundary, section.target_h, label_fn=_fixed_labels(section))


# ==================== PROBLEMS ====================

def _constant(value, key: str) -> float:
    polynomial = expression(value)
    if polynomial.degree > 0:
        raise ConfigError(f"{key} must be a constant for this problem", key)
    return float(polynomial.at(np.zeros((1, 2)))[0])


def _fluxes(values: Dict[int, Any]) -> Optional[Dict[int, Any]]:
    return {label: expression(value) for label, value in values.items()} or None


def build_objective(run: RunConfig) -> Objective:
    section = run.objective
    if section.name in ("u2", "linear"):
        return Objective.named(section.name, weight=section.weight)
    if section.name == "neg_energy":
        return Objective.named(section.name, gamma=_constant(run.physics.gamma, "physics.gamma"))
    return Objective.named(section.name)


def physics_arguments(run: RunConfig) -> Dict[str, Any]:
    """Keyword arguments of the problem class selected by optimizer.problem."""
    problem, physics = run.optimizer.problem, run.physics
    if PROBLEM_MODELS[problem] != physics.model:
        raise ConfigError(f"Problem '{problem}' needs physics.model '{PROBLEM_MODELS[problem]}', "
                          f"got '{physics.model}'", "physics.model")
    objective = build_objective(run)
    if problem == PROBLEM_CONDUCTIVITY:
        return dict(objective=objective, gamma=expression(physics.gamma), f=expression(physics.f),
                    g=_fluxes(physics.g), kind=physics.region_kind, g_region=physics.g_region,
                    dirichlet_label=physics.dirichlet_label)
    if problem == PROBLEM_MIXER:
        return dict(objective=objective, gamma=_constant(physics.gamma, "physics.gamma"),
                    f=expression(physics.f), u_in=physics.u_in)
    if problem == PROBLEM_HELMHOLTZ:
        return dict(objective=objective, gamma=expression(physics.gamma), k=physics.k, Z=physics.Z,
                    f=expression(physics.f), g=_fluxes(physics.g))
    f = tuple(expression(item) for item in physics.f_vector) if physics.f_vector else None
    g = {label: tuple(value) for label, value in physics.traction.items()} or None
    if problem == PROBLEM_SUPPORT:
        return dict(objective=objective, E=physics.E, nu=physics.nu, f=f, g=g)
    return dict(objective=objective, E=physics.E, nu=physics.nu, pressure=physics.pressure,
                clamp_label=physics.clamp_label, f=f, g=g)


def initial_regions(run: RunConfig, mesh: Mesh2D) -> List[BoundaryLevelSet]:
    def region(arcs) -> BoundaryLevelSet:
        return arcs_to_levelset(mesh, arcs) if arcs else empty_region(mesh)

    if run.optimizer.problem == PROBLEM_MIXER:
        return [region(run.region.arcs), region(run.region.anode_arcs)]
    return [region(run.region.arcs)]


@dataclass
class Setup:
    run: RunConfig
    mesh: Mesh2D
    problem: Problem
    regions: List[BoundaryLevelSet]


def setup(run: RunConfig) -> Setup:
    """Mesh, problem and initial regions of a 2D run configuration."""
    if run.mesh.shape == "screen-disk":
        raise ConfigError("2D commands need a disk or square mesh", "mesh.shape")
    mesh = build_mesh(run.mesh)
    problem = build_problem(mesh, run.opt_config(), **physics_arguments(run))
    regions = initial_regions(run, mesh)
    logger.info(f"Set up '{problem.name}' on {mesh.n_vertices} vertices, {mesh.n_triangles} triangles")
    return Setup(run, mesh, problem, regions)


def region_document(regions: List[BoundaryLevelSet], names: Tuple[str, ...]) -> Dict[str, Any]:
    """Arclength intervals of every region."""
    return {
        name: {"intervals": [list(item) for item in IntervalData.from_levelset(ls).intervals],
               "perimeter": ls.perimeter}
        for name, ls in zip(names, regions)
    }
