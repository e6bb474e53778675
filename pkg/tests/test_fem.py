import numpy as np
import pytest
from fem import (
    FemField, IntervalData, Objective, adjoint_source, energy_balance_helmholtz, evaluate_objective,
    interpolate_at, l2_error, load, mean_strain, plane_stress_lame, robin_eps, solve_conductivity_adjoint,
    solve_conductivity_sharp, solve_conductivity_smoothed, solve_elasticity, solve_helmholtz, trace_at
)
from region import arcs_to_levelset
from smoothing import robin_coefficient
from utils.errors import ConsistencyError, GeometryError, NumericError, SolvabilityError, ValidationError
from utils.expressions import Polynomial

LINEAR = Polynomial.parse("x + 2*y")


def _all_edges(mesh):
    return np.ones(mesh.n_boundary_edges, dtype=bool)


# ==================== FIELDS ====================

def test_field_checks_shape_and_values(square_mesh):
    with pytest.raises(ConsistencyError):
        FemField(square_mesh, np.zeros(3), "conductivity")
    with pytest.raises(NumericError):
        FemField(square_mesh, np.full(square_mesh.n_vertices, np.inf), "conductivity")


def test_interval_measure(square_mesh):
    assert IntervalData(((0.55, 1.45),)).measure(square_mesh) == pytest.approx(0.9)
    assert IntervalData(((3.5, 0.5),)).measure(square_mesh) == pytest.approx(1.0)
    assert IntervalData(((0.0, 4.0),)).measure(square_mesh) == pytest.approx(4.0)


def test_interval_from_levelset(square_mesh):
    data = IntervalData.from_levelset(arcs_to_levelset(square_mesh, [(0.55, 1.45)]), 2.0)
    assert len(data.intervals) == 1
    assert data.intervals[0] == pytest.approx((0.55, 1.45))
    assert data.value == 2.0


# ==================== CONDUCTIVITY ====================

def test_dirichlet_reproduces_linear_solution(square_mesh):
    u = solve_conductivity_sharp(square_mesh, tags=_all_edges(square_mesh), u_in=LINEAR)
    np.testing.assert_allclose(u.values, LINEAR.at(square_mesh.vertices), atol=1e-10)
    assert l2_error(u, LINEAR) < 1e-10


def test_robin_reproduces_linear_solution(square_mesh):
    # u = x + 1 satisfies du/dn + u = g side by side
    g = {1: Polynomial.parse("x + 1"), 2: 3.0, 3: Polynomial.parse("x + 1"), 4: 0.0}
    u = solve_conductivity_smoothed(square_mesh, g=g, robin=1.0)
    np.testing.assert_allclose(u.values, square_mesh.vertices[:, 0] + 1.0, atol=1e-10)


def test_pure_neumann_zero_mean(square_mesh):
    u = solve_conductivity_smoothed(square_mesh, g={2: 1.0, 4: -1.0})
    np.testing.assert_allclose(u.values, square_mesh.vertices[:, 0] - 0.5, atol=1e-10)


def test_pure_neumann_incompatible_data(square_mesh):
    with pytest.raises(SolvabilityError):
        solve_conductivity_smoothed(square_mesh, f=1.0)


def test_negative_robin_rejected(square_mesh):
    with pytest.raises(ValidationError):
        solve_conductivity_smoothed(square_mesh, robin=-1.0)


def test_adjoint_duality(square_mesh):
    u = solve_conductivity_smoothed(square_mesh, f=1.0, robin=1.0)
    objective = Objective.linear()
    p = solve_conductivity_adjoint(square_mesh, 1.0, u, objective, robin=1.0)
    J = evaluate_objective(objective, u)
    assert J == pytest.approx(-float(p.values @ load(square_mesh, 1.0)), rel=1e-10)
    assert p.kind == "adjoint"


def test_adjoint_requires_same_mesh(square_mesh, disk_mesh):
    u = solve_conductivity_smoothed(square_mesh, f=1.0, robin=1.0)
    with pytest.raises(ConsistencyError):
        solve_conductivity_adjoint(disk_mesh, 1.0, u, Objective.u2(), robin=1.0)


# ==================== OBJECTIVES AND EVALUATION ====================

def test_objective_presets(square_mesh):
    ones = FemField(square_mesh, np.ones(square_mesh.n_vertices), "conductivity")
    assert evaluate_objective(Objective.u2(), ones) == pytest.approx(1.0)
    assert evaluate_objective(Objective.mean_square(), ones) == pytest.approx(0.5)
    assert evaluate_objective(Objective.linear(2.0), ones) == pytest.approx(2.0)
    x = FemField(square_mesh, square_mesh.vertices[:, 0].copy(), "conductivity")
    assert evaluate_objective(Objective.neg_energy(), x) == pytest.approx(-1.0)
    assert adjoint_source(Objective.linear(), ones).sum() == pytest.approx(1.0)


@pytest.mark.parametrize("name, expected", [("u2", 1.0), ("abs2", 1.0), ("mean_square", 0.5)])
def test_quadratic_objectives_on_scalar_fields(square_mesh, name, expected):
    ones = FemField(square_mesh, np.ones(square_mesh.n_vertices), "conductivity")
    assert evaluate_objective(Objective.named(name), ones) == pytest.approx(expected)


@pytest.mark.parametrize("name, expected", [("u2", 25.0), ("abs2", 25.0), ("mean_square", 12.5)])
def test_quadratic_objectives_on_complex_fields(square_mesh, name, expected):
    field = FemField(square_mesh, np.full(square_mesh.n_vertices, 3.0 + 4.0j), "helmholtz")
    assert evaluate_objective(Objective.named(name), field) == pytest.approx(expected)


@pytest.mark.parametrize("name, expected", [("u2", 5.0), ("abs2", 5.0), ("mean_square", 2.5)])
def test_quadratic_objectives_on_vector_fields(square_mesh, name, expected):
    values = np.tile([1.0, 2.0], (square_mesh.n_vertices, 1))
    field = FemField(square_mesh, values, "elasticity")
    assert evaluate_objective(Objective.named(name), field) == pytest.approx(expected)
    assert adjoint_source(Objective.named(name), field).shape == (2 * square_mesh.n_vertices,)


def test_u2_matches_exact_integral_of_x_squared(square_mesh):
    x = FemField(square_mesh, square_mesh.vertices[:, 0].copy(), "conductivity")
    assert evaluate_objective(Objective.u2(), x) == pytest.approx(1.0 / 3.0)


def test_named_objective():
    assert Objective.named("u2", weight=3.0).coefficients == {"weight": 3.0}
    with pytest.raises(ValidationError):
        Objective.named("nonsense")


def test_point_evaluation(square_mesh):
    u = FemField(square_mesh, LINEAR.at(square_mesh.vertices), "conductivity")
    assert float(interpolate_at(u, (0.3, 0.4))) == pytest.approx(1.1)
    assert float(interpolate_at(u, (0.5, 0.0))) == pytest.approx(0.5)
    assert float(trace_at(u, 1.5)) == pytest.approx(2.0)
    with pytest.raises(GeometryError):
        interpolate_at(u, (2.0, 2.0))


# ==================== HELMHOLTZ ====================

def test_helmholtz_energy_balance(square_mesh):
    tags = _all_edges(square_mesh)
    u = solve_helmholtz(square_mesh, 1.0, 2.0, 1.0, 1.0, tags)
    assert u.is_complex
    absorbed, supplied = energy_balance_helmholtz(u, 2.0, 1.0, 1.0, tags)
    assert absorbed > 0
    assert absorbed == pytest.approx(supplied, rel=1e-8)


def test_helmholtz_rejects_bad_wavenumber(square_mesh):
    with pytest.raises(ValidationError):
        solve_helmholtz(square_mesh, 1.0, 0.0, 1.0, 1.0, _all_edges(square_mesh))


# ==================== ELASTICITY ====================

def test_plane_stress_lame():
    lam, mu = plane_stress_lame(1.0, 0.3)
    assert lam == pytest.approx(0.3 / 0.91)
    assert mu == pytest.approx(1.0 / 2.6)
    with pytest.raises(ValidationError):
        plane_stress_lame(1.0, 0.6)


def test_clamped_linear_displacement(square_mesh):
    lam, mu = plane_stress_lame(1.0, 0.3)

    def stretch(points):
        return np.column_stack([points[:, 0], np.zeros(len(points))])

    u = solve_elasticity(square_mesh, lam, mu, tags=_all_edges(square_mesh), u_d=stretch)
    np.testing.assert_allclose(u.values[:, 0], square_mesh.vertices[:, 0], atol=1e-10)
    np.testing.assert_allclose(u.values[:, 1], 0.0, atol=1e-10)
    np.testing.assert_allclose(mean_strain(u), [1.0, 0.0, 0.0], atol=1e-10)


def test_pure_traction_has_rigid_modes(square_mesh):
    lam, mu = plane_stress_lame(1.0, 0.3)
    with pytest.raises(SolvabilityError):
        solve_elasticity(square_mesh, lam, mu, g={3: (0.0, -1.0)})


def test_supported_plate_sags_under_load(square_mesh):
    lam, mu = plane_stress_lame(1.0, 0.3)
    bottom = square_mesh.edge_labels == 1
    u = solve_elasticity(square_mesh, lam, mu, g={3: (0.0, -1.0)}, tags=bottom)
    top = square_mesh.vertices[:, 1] > 0.99
    assert np.all(u.values[top, 1] < 0)
    np.testing.assert_allclose(u.values[square_mesh.vertices[:, 1] < 1e-12], 0.0)


def test_elasticity_keeps_eps_of_mixed_robin(square_mesh):
    lam, mu = plane_stress_lame(1.0, 0.3)
    support = robin_coefficient(arcs_to_levelset(square_mesh, [(0.0, 1.0)]), 0.1)
    springs = np.full((square_mesh.n_boundary_edges, 2), 0.5)
    u = solve_elasticity(square_mesh, lam, mu, g={3: (0.0, -1.0)}, robin=[support, springs])
    assert u.eps == pytest.approx(0.1)
    assert robin_eps([springs, support]) == pytest.approx(0.1)
    assert robin_eps(springs) is None
