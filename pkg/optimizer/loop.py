"""
The coupled shape and topology optimization loop.
"""
import logging
import math
from typing import Callable, Dict, Optional, Sequence, Tuple, Union
import numpy as np
from derivatives.topological import select_insertion_point
from mesh2d.mesh import Mesh2D
from optimizer.line_search import line_search
from optimizer.models import IterationRecord, OptConfig, OptHistory
from optimizer.problems import Evaluation, Problem, build_problem
from region.evolution import advect, descent_velocity, insert_disk, mask_fixed
from region.levelset import BoundaryLevelSet, redistance
from utils.constants import (
    EVENT_GEOMETRIC, EVENT_INITIAL, EVENT_REJECTED, EVENT_ROLLBACK, EVENT_TOPOLOGICAL, TOPO_GUARD_RATIO
)
from utils.decorators import with_context
from utils.errors import SolvabilityError

logger = logging.getLogger(__name__)

Regions = Tuple[BoundaryLevelSet, ...]
IterationHook = Callable[[IterationRecord, Evaluation], None]


def keep_apart(ls: BoundaryLevelSet, others: Sequence[BoundaryLevelSet]) -> BoundaryLevelSet:
    """Remove the other regions from G: phi >= -phi_other."""
    if not others:
        return ls
    phi = ls.phi
    for other in others:
        phi = np.maximum(phi, -other.phi)
    if np.array_equal(phi, ls.phi):
        return ls
    return redistance(ls.with_phi(phi))


def _constrain(problem: Problem, regions: Regions, index: int) -> Regions:
    others = [ls for k, ls in enumerate(regions) if k != index]
    updated = keep_apart(mask_fixed(regions[index], problem.mesh), others)
    return regions[:index] + (updated,) + regions[index + 1:]


def _record(iteration: int, evaluation: Evaluation, tau: float, event: str) -> IterationRecord:
    return IterationRecord(iteration, evaluation.J, evaluation.area, evaluation.cont, evaluation.J_tot,
                           float(tau), event, evaluation.interfaces)


class Optimizer:
    """
    Alternates topological insertions and line-searched geometric steps.

    Geometric steps move one region at a time, cycling through the
    problem's regions. Trial steps whose state problem becomes singular
    count as failed trials.
    """

    def __init__(self, problem: Problem, config: OptConfig = None, on_iteration: Optional[IterationHook] = None):
        self.problem = problem
        self.config = config or problem.config
        self.on_iteration = on_iteration
        self.tau = self.config.tau0
        self.geometric_steps = 0

    # ==================== TOPOLOGICAL STEP ====================

    def topological_step(self, current: Evaluation) -> Optional[Evaluation]:
        """
        Insert one disk at the most negative admissible topological derivative.

        Returns:
            Evaluation of the enlarged regions, or None without a negative value
        """
        regions = current.regions
        perimeter = regions[0].perimeter
        eps_top = self.config.insertion_radius(perimeter)
        delta = self.config.exclusion_distance(perimeter)

        best = None
        for index, tf in enumerate(self.problem.topo_fields(regions, delta)):
            if tf is None:
                continue
            choice = select_insertion_point(tf)
            if choice is not None and (best is None or choice[1] < best[2]):
                best = (index, tf.arclength_of(choice[0]), choice[1])
        if best is None:
            logger.debug("No negative topological derivative, falling back to a geometric step")
            return None

        index, s, value = best
        enlarged = regions[:index] + (insert_disk(regions[index], s, eps_top),) + regions[index + 1:]
        enlarged = _constrain(self.problem, enlarged, index)
        logger.debug(f"Inserting into {self.problem.regions[index]} at s={s:.6g} (derivative {value:.4e})")
        return self.problem.evaluate(enlarged)

    # ==================== GEOMETRIC STEP ====================

    def _trial(self, regions: Regions, index: int, velocity: np.ndarray, trials: Dict[float, Evaluation]):
        def evaluate(tau: float) -> float:
            moved = regions[:index] + (advect(regions[index], velocity, tau),) + regions[index + 1:]
            try:
                evaluation = self.problem.evaluate(_constrain(self.problem, moved, index))
            except SolvabilityError as e:
                logger.debug(f"Trial step tau={tau:.3e} rejected: {e}")
                return math.inf
            trials[tau] = evaluation
            return evaluation.J_tot
        return evaluate

    def geometric_step(self, current: Evaluation) -> Tuple[Evaluation, float, str]:
        """
        Descent step of the active region with backtracking.

        Returns:
            (evaluation after the step, tau tried or accepted, event)
        """
        index = self.geometric_steps % self.problem.n_regions
        self.geometric_steps += 1
        ls = current.regions[index]

        gradient = self.problem.shape_gradient(current, index)
        velocity = descent_velocity(ls, list(gradient.interface), gradient.values)
        vmax = float(np.abs(velocity).max()) if velocity.size else 0.0
        if vmax == 0.0:
            self.tau *= self.config.backtrack_factor
            return current, 0.0, EVENT_REJECTED

        trials: Dict[float, Evaluation] = {}
        result = line_search(self._trial(current.regions, index, velocity / vmax, trials), self.tau,
                             self.config.backtrack_factor, self.config.max_backtracks, current.J_tot)
        if not result.accepted:
            self.tau *= self.config.backtrack_factor
            return current, result.tau, EVENT_REJECTED
        return trials[result.tau], result.tau, EVENT_GEOMETRIC

    # ==================== LOOP ====================

    def iterate(self, iteration: int, current: Evaluation) -> Tuple[Evaluation, float, str]:
        if self.config.is_topological(iteration):
            inserted = self.topological_step(current)
            if inserted is not None:
                growth = inserted.J_tot - current.J_tot
                if self.config.topo_guard and growth > TOPO_GUARD_RATIO * abs(current.J_tot):
                    logger.info(f"Iteration {iteration}: insertion raised J_tot by {growth:.3e}, rolled back")
                    return current, 0.0, EVENT_ROLLBACK
                return inserted, 0.0, EVENT_TOPOLOGICAL
        return self.geometric_step(current)

    def run(self, initial: Sequence[BoundaryLevelSet]) -> Tuple[Regions, OptHistory]:
        regions = tuple(initial)
        for index in range(len(regions)):
            regions = _constrain(self.problem, regions, index)

        current = with_context("optimizer start")(self.problem.evaluate)(regions)
        history = OptHistory()
        history.append(_record(0, current, 0.0, EVENT_INITIAL))
        logger.info(f"Optimizing '{self.problem.name}': J={current.J:.6e} J_tot={current.J_tot:.6e}")

        for iteration in range(1, self.config.max_iter + 1):
            current, tau, event = with_context(f"optimizer iteration {iteration}")(self.iterate)(iteration, current)
            record = _record(iteration, current, tau, event)
            history.append(record)
            logger.info(f"Iteration {iteration} [{event}]: J={record.J:.6e} J_tot={record.J_tot:.6e} "
                        f"area={record.area:.4g} cont={record.cont} tau={tau:.3e}")
            if self.on_iteration is not None:
                self.on_iteration(record, current)
            if history.stagnated(self.config.window, self.config.tolerance):
                logger.info(f"Stopping at iteration {iteration}: relative decrease below "
                            f"{self.config.tolerance:g} over {self.config.window} iterations")
                break
        return current.regions, history


def run(config: OptConfig, mesh: Union[Mesh2D, Problem], initial: Union[BoundaryLevelSet, Sequence[BoundaryLevelSet]],
        on_iteration: Optional[IterationHook] = None, **physics):
    """
    Optimize the regions on a mesh from an initial configuration.

    Args:
        config: loop parameters; config.problem picks the state model
        mesh: base mesh, or a problem already bound to one
        initial: one level set, or one per region of the problem
        on_iteration: called with each record and its evaluation (snapshots)
        physics: keyword arguments of the problem class when mesh is a Mesh2D

    Returns:
        (final level set(s) in the shape of initial, OptHistory)
    """
    problem = build_problem(mesh, config, **physics) if isinstance(mesh, Mesh2D) else mesh
    single = isinstance(initial, BoundaryLevelSet)
    regions, history = Optimizer(problem, config, on_iteration).run([initial] if single else initial)
    return (regions[0] if single else regions), history
