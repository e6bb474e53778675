import numpy as np
import pytest
from derivatives.shape import ShapeGradient
from derivatives.topological import TopoField
from fem.fields import Objective
from optimizer import (
    ConductivityProblem, OptConfig, OptHistory, IterationRecord, Problem, build_problem, keep_apart, line_search,
    penalized_objective, run
)
from region import area, arcs_to_levelset, cont, extract_interface
from utils.constants import EVENT_GEOMETRIC, EVENT_INITIAL, EVENT_REJECTED, EVENT_ROLLBACK, EVENT_TOPOLOGICAL
from utils.errors import ConsistencyError, NumericError, ValidationError


class AreaTargetProblem(Problem):
    """J = weight (|G| - target)^2, no PDE behind it."""
    name = "area-target"

    def __init__(self, mesh, config, target, weight=1.0, insertion_vertex=None):
        super().__init__(mesh, config, Objective.u2())
        self.target = target
        self.weight = weight
        self.insertion_vertex = insertion_vertex

    def evaluate(self, regions):
        (ls,) = self.check_regions(regions)
        J = self.weight * (area(ls) - self.target) ** 2
        return self.penalized(regions, J, None)

    def shape_gradient(self, evaluation, index=0):
        (ls,) = evaluation.regions
        interface = tuple(extract_interface(ls))
        values = np.full(len(interface), 2.0 * self.weight * (area(ls) - self.target))
        return ShapeGradient(values, interface, "area-target")

    def topo_fields(self, regions, delta_excl):
        if self.insertion_vertex is None:
            return [None]
        k = self.insertion_vertex
        vertex = self.mesh.loop_vertices(0)[k]
        s = self.mesh.loop_arclength(0)[k]
        return [TopoField(np.array([-1.0]), np.array([vertex]), np.array([s]), "conduc_dirichlet_hom", delta_excl)]


# ==================== MODELS ====================

def test_penalized_objective():
    assert penalized_objective(1.0, 2.0, 4, 0.5, 0.25) == pytest.approx(3.0)
    assert penalized_objective(-2.0, 1.0, 2, 0.0, 0.0) == pytest.approx(-2.0)


def test_config_defaults_and_schedule():
    config = OptConfig("conductivity", n_top=5, n_top_stop=10)
    assert config.insertion_radius(10.0) == pytest.approx(0.2)
    assert config.exclusion_distance(10.0) == pytest.approx(0.6)
    assert [i for i in range(1, 21) if config.is_topological(i)] == [5, 10]
    assert config.with_overrides(eps_top=0.1).insertion_radius(10.0) == pytest.approx(0.1)


@pytest.mark.parametrize("changes", [
    {"problem": "stokes"}, {"tau0": 0.0}, {"ell": -1.0}, {"n_top": 0}, {"backtrack_factor": 1.0},
    {"shape_gradient_mode": "exact"}, {"robin_prefactor": "half"},
])
def test_config_rejects(changes):
    params = {"problem": "conductivity", **changes}
    with pytest.raises(ValidationError):
        OptConfig(**params)


def test_history_stagnation_and_order():
    history = OptHistory()
    for i, value in enumerate([5.0, 4.0, 4.0, 4.0]):
        history.append(IterationRecord(i, value, 0.0, 0, value, 0.0, EVENT_GEOMETRIC, 0))
    assert history.stagnated(2, 1e-6)
    assert not history.stagnated(3, 1e-6)
    assert history.monotone_violations() == [2, 3]
    with pytest.raises(ConsistencyError):
        history.append(IterationRecord(3, 1.0, 0.0, 0, 1.0, 0.0, EVENT_GEOMETRIC, 0))


# ==================== LINE SEARCH ====================

def test_line_search_accepts_full_step():
    result = line_search(lambda tau: (tau - 1.0) ** 2, 1.0)
    assert result.accepted
    assert result.tau == 1.0
    assert result.value == 0.0
    assert result.trials == 1


def test_line_search_backtracks():
    result = line_search(lambda tau: (tau - 0.2) ** 2, 1.0, 0.5, 8)
    assert result.accepted
    assert result.tau == pytest.approx(0.25)
    assert result.trials == 3


def test_line_search_rejects_increasing_objective():
    result = line_search(lambda tau: 1.0 + tau, 1.0, 0.5, 4)
    assert not result.accepted
    assert result.value == 1.0
    assert result.tau == pytest.approx(1.0 / 16)
    assert result.trials == 5


def test_line_search_treats_inf_as_failure():
    result = line_search(lambda tau: np.inf if tau > 0.3 else 1.0 - tau, 1.0, 0.5, 4)
    assert result.accepted
    assert result.tau == pytest.approx(0.25)


def test_line_search_needs_finite_start():
    with pytest.raises(NumericError):
        line_search(lambda tau: np.nan, 1.0)


# ==================== LOOP ====================

def test_keep_apart_removes_overlap(disk_mesh):
    a = arcs_to_levelset(disk_mesh, [(0.5, 2.5)])
    b = arcs_to_levelset(disk_mesh, [(2.0, 3.0)])
    assert area(keep_apart(a, [b])) == pytest.approx(1.5, abs=1e-6)
    assert keep_apart(a, []) is a


def test_geometric_steps_reach_target_area(disk_mesh):
    config = OptConfig("conductivity", max_iter=25, tau0=0.1, n_top_stop=0)
    problem = AreaTargetProblem(disk_mesh, config, target=1.0)
    final, history = run(config, problem, arcs_to_levelset(disk_mesh, [(0.5, 2.5)]))
    assert history.records[0].event == EVENT_INITIAL
    assert history.records[0].J == pytest.approx(1.0, abs=1e-6)
    assert history.monotone_violations() == []
    assert all(r.event in (EVENT_GEOMETRIC, EVENT_REJECTED) for r in history.records[1:])
    values = history.values()
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert abs(area(final) - 1.0) < 0.1
    assert cont(final) == 2


def test_run_builds_problem_from_mesh(disk_mesh):
    config = OptConfig("conductivity", max_iter=2, n_top_stop=0)
    initial = arcs_to_levelset(disk_mesh, [(0.5, 2.5)])
    final, history = run(config, disk_mesh, initial, f=2.0)
    _, expected = run(config, ConductivityProblem(disk_mesh, config, f=2.0), initial)
    assert final.size == initial.size
    assert history.records[0].event == EVENT_INITIAL
    assert history.values() == pytest.approx(expected.values())


def test_zero_objective_stagnates(disk_mesh):
    config = OptConfig("conductivity", max_iter=50, window=3)
    problem = AreaTargetProblem(disk_mesh, config, target=1.0, weight=0.0)
    _, history = run(config, problem, arcs_to_levelset(disk_mesh, [(0.5, 2.5)]))
    assert history.last.iteration == 3
    assert [r.event for r in history.records[1:]] == [EVENT_REJECTED] * 3


def test_topological_step_inserts_disk(disk_mesh):
    config = OptConfig("conductivity", max_iter=1, n_top=1, n_top_stop=1, eps_top=0.2)
    problem = AreaTargetProblem(disk_mesh, config, target=3.0, insertion_vertex=48)
    final, history = run(config, problem, arcs_to_levelset(disk_mesh, [(0.5, 2.5)]))
    assert history.last.event == EVENT_TOPOLOGICAL
    assert area(final) == pytest.approx(2.4, abs=1e-6)
    assert cont(final) == 4
    assert history.last.interfaces == 2


def test_topological_fallback_and_guard(disk_mesh):
    config = OptConfig("conductivity", max_iter=1, n_top=1, n_top_stop=1, eps_top=0.2, topo_guard=True)
    initial = arcs_to_levelset(disk_mesh, [(0.5, 2.5)])

    guarded = AreaTargetProblem(disk_mesh, config, target=1.0, insertion_vertex=48)
    final, history = run(config, guarded, initial)
    assert history.last.event == EVENT_ROLLBACK
    assert area(final) == pytest.approx(2.0, abs=1e-6)

    without_field = AreaTargetProblem(disk_mesh, config, target=1.0)
    _, history = run(config, without_field, initial)
    assert history.last.event == EVENT_GEOMETRIC


def test_problem_checks_region_count(disk_mesh):
    config = OptConfig("mixer")
    problem = build_problem(disk_mesh, config)
    ls = arcs_to_levelset(disk_mesh, [(0.5, 2.5)])
    with pytest.raises(ValidationError):
        problem.evaluate([ls])


@pytest.mark.slow
def test_conductivity_descent(disk_mesh):
    config = OptConfig("conductivity", ell=0.01, max_iter=5, tau0=0.2, n_top_stop=0)
    problem = ConductivityProblem(disk_mesh, config)
    initial = arcs_to_levelset(disk_mesh, [(0.0, 1.0)])
    _, history = run(config, problem, initial)
    values = history.values()
    assert history.monotone_violations() == []
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert values[-1] < values[0]
