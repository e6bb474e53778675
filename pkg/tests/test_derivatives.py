import math
from functools import lru_cache
import numpy as np
import pytest
from derivatives import (
    ShapeGradient, area_penalty, combine, contour_penalty_2d, dirichlet_smoothed, dirichlet_smoothed_integral, rho,
    select_insertion_point, shape_gradient, topo_field, vertex_normals
)
from derivatives.topological import elast_dirichlet_2d, elast_dirichlet_3d, helmholtz_impedance_coefficient
from fem import FemField, Objective, evaluate_objective, solve_conductivity_adjoint, solve_conductivity_smoothed
from region import advect, arcs_to_levelset, descent_velocity, empty_region, extract_interface
from smoothing import robin_coefficient
from utils.errors import ConsistencyError, ValidationError
from utils.expressions import Polynomial
from validation.oracles import (
    conductivity_log_law, dirichlet_inhom_log_law, mixer_anode_log_law, mixer_cathode_log_law, neumann_linear_law
)
from validation.suites import finite_difference_error, shape_problems


@pytest.fixture(scope="module")
def free_square(square_mesh):
    """Unit square with every boundary edge optimizable."""
    return square_mesh.with_labels(np.zeros(square_mesh.n_boundary_edges))


def _constant(mesh, value):
    return FemField(mesh, np.full(mesh.n_vertices, float(value)), "conductivity")


# ==================== SCALE FUNCTIONS AND COEFFICIENTS ====================

def test_rho_values():
    assert rho("conduc_dirichlet_hom", 0.01) == pytest.approx(math.pi / math.log(100.0))
    assert rho("conduc_neumann_inhom", 0.1) == pytest.approx(0.2)
    assert rho("elast_dirichlet_2d", 0.1) == pytest.approx(1.0 / math.log(10.0))
    assert rho("conduc_dirichlet_hom", 0.1, dim=3) == pytest.approx(0.4)
    assert rho("helmholtz_impedance", 0.1, dim=3) == pytest.approx(math.pi * 0.01)


def test_rho_rejects_invalid():
    with pytest.raises(ValidationError):
        rho("nonsense", 0.1)
    with pytest.raises(ValidationError):
        rho("conduc_dirichlet_hom", 1.5)
    with pytest.raises(ValidationError):
        rho("elast_dirichlet_2d", 0.1, dim=3)


def test_coefficients():
    nu_bar = 0.3 / 1.3
    expected = math.pi / (1.0 - nu_bar)
    assert float(elast_dirichlet_2d(np.array([1.0, 0.0]), np.array([1.0, 0.0]), 1.0, 0.3)) == pytest.approx(expected)
    assert float(elast_dirichlet_3d([1.0, 2.0], [3.0, 4.0], np.eye(3))) == pytest.approx(11.0)
    assert float(helmholtz_impedance_coefficient(1.0, 1j, 2.0)) == pytest.approx(2.0)


# ==================== TOPOLOGICAL FIELD ====================

def test_topo_field_and_selection(free_square):
    ls = empty_region(free_square)
    tf = topo_field("conduc_dirichlet_hom", free_square, ls, _constant(free_square, 1.0),
                    _constant(free_square, -1.0))
    assert len(tf.values) == free_square.n_boundary_edges
    np.testing.assert_allclose(tf.values, -1.0)
    vertex, value = select_insertion_point(tf)
    assert value == -1.0
    assert tf.arclength_of(vertex) == 0.0
    assert tf.predicted(vertex, 0.01) == pytest.approx(-math.pi / math.log(100.0))


def test_topo_field_without_descent(free_square):
    ls = empty_region(free_square)
    tf = topo_field("conduc_neumann_inhom", free_square, ls, None, _constant(free_square, -1.0), g=1.0)
    np.testing.assert_allclose(tf.values, 1.0)
    assert select_insertion_point(tf) is None


def test_topo_field_excludes_region(free_square):
    ls = arcs_to_levelset(free_square, [(0.5, 1.5)])
    tf = topo_field("conduc_dirichlet_hom", free_square, ls, _constant(free_square, 1.0),
                    _constant(free_square, 1.0), delta_excl=0.3)
    assert np.all(ls.phi[np.isin(free_square.loop_vertices(), tf.vertices)] > 0.3)
    with pytest.raises(ConsistencyError):
        select_insertion_point(tf, delta_excl=0.1)


def test_topo_field_requires_fitted_mesh(free_square):
    ls = arcs_to_levelset(free_square, [(0.55, 1.45)])
    with pytest.raises(ConsistencyError):
        topo_field("conduc_dirichlet_hom", free_square, ls, _constant(free_square, 1.0),
                   _constant(free_square, 1.0))
    with pytest.raises(ValidationError):
        topo_field("nonsense", free_square, empty_region(free_square))


def test_vertex_normals_at_corner(free_square):
    normals = vertex_normals(free_square)
    np.testing.assert_allclose(normals[0], [-1.0 / math.sqrt(2.0), -1.0 / math.sqrt(2.0)])
    np.testing.assert_allclose(normals[1], [0.0, -1.0], atol=1e-12)


# ==================== SHAPE GRADIENTS ====================

def test_shape_gradient_algebra(square_mesh):
    interface = tuple(extract_interface(arcs_to_levelset(square_mesh, [(0.55, 1.45)])))
    gradient = ShapeGradient(np.array([1.0, -2.0]), interface, "test")
    assert gradient.predicted_change() == pytest.approx(-5.0)
    np.testing.assert_allclose(gradient.descent_direction(), [-1.0, 2.0])
    total = combine([gradient, area_penalty(0.5, interface)])
    np.testing.assert_allclose(total.values, [1.5, -1.5])
    with pytest.raises(ConsistencyError):
        ShapeGradient(np.array([1.0]), interface, "bad")


def test_contour_penalty(square_mesh):
    interface = extract_interface(arcs_to_levelset(square_mesh, [(0.55, 1.45)]))
    np.testing.assert_allclose(contour_penalty_2d(1.0, interface).values, 0.0)
    values = contour_penalty_2d(Polynomial.parse("x"), interface, square_mesh).values
    np.testing.assert_allclose(values, [-1.0, 0.0], atol=1e-12)


def test_dirichlet_collapsed_form(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.55, 1.45)])
    robin = robin_coefficient(ls, 0.1)
    gradient = shape_gradient("dirichlet_smoothed", u=_constant(square_mesh, 2.0), p=_constant(square_mesh, 3.0),
                              robin=robin)
    np.testing.assert_allclose(gradient.values, 60.0)
    mismatched = FemField(square_mesh, np.ones(square_mesh.n_vertices), "conductivity", eps=0.2)
    with pytest.raises(ConsistencyError):
        dirichlet_smoothed(mismatched, _constant(square_mesh, 1.0), robin)
    with pytest.raises(ValidationError):
        shape_gradient("nonsense")


def test_integral_gradient_matches_finite_differences(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.55, 1.45)])
    eps = 0.3
    objective = Objective.u2()
    robin = robin_coefficient(ls, eps)
    u = solve_conductivity_smoothed(square_mesh, f=1.0, robin=robin)
    p = solve_conductivity_adjoint(square_mesh, 1.0, u, objective, robin=robin)
    gradient = dirichlet_smoothed_integral(u, p, robin)

    def J(phi):
        shifted = robin_coefficient(ls.with_phi(phi), eps)
        return evaluate_objective(objective, solve_conductivity_smoothed(square_mesh, f=1.0, robin=shifted))

    step = 1e-6
    for k in range(2):
        zone = (robin.zone == k).astype(float)
        numeric = (J(ls.phi - step * zone) - J(ls.phi + step * zone)) / (2 * step)
        assert gradient.values[k] == pytest.approx(numeric, rel=1e-4, abs=1e-9)


def _coordinate_field(mesh, column, shift, scale=1.0):
    return FemField(mesh, scale * (mesh.vertices[:, column] + shift), "conductivity")


@pytest.mark.parametrize("c", [3.0, -0.5])
def test_selection_ignores_common_scaling(free_square, c):
    ls = empty_region(free_square)
    base = topo_field("conduc_dirichlet_hom", free_square, ls, _coordinate_field(free_square, 0, 0.1),
                      _coordinate_field(free_square, 1, 0.2, -1.0))
    scaled = topo_field("conduc_dirichlet_hom", free_square, ls, _coordinate_field(free_square, 0, 0.1, c),
                        _coordinate_field(free_square, 1, 0.2, -c))
    vertex, value = select_insertion_point(base)
    np.testing.assert_allclose(free_square.vertices[vertex], [1.0, 1.0])
    assert select_insertion_point(scaled) == (vertex, pytest.approx(c * c * value))


# ==================== DESCENT ====================

def test_descent_velocity_realises_negative_gradient(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.55, 1.45)])
    interface = extract_interface(ls)
    gradient = ShapeGradient(np.array([1.0, -2.0]), tuple(interface), "test")
    velocity = descent_velocity(ls, interface, gradient.values, width=1e-3)

    nearest = [int(np.argmin(np.abs(ls.s - point.s))) for point in interface]
    normal_speed = np.array([point.conormal_sign * velocity[k] for point, k in zip(interface, nearest)])
    np.testing.assert_allclose(normal_speed, gradient.descent_direction())
    assert float(gradient.values @ normal_speed) == pytest.approx(gradient.predicted_change())

    moved = extract_interface(advect(ls, velocity, 0.01))
    assert [point.s for point in moved] == [pytest.approx(0.56, abs=1e-8), pytest.approx(1.47, abs=1e-8)]


# ==================== COARSE ORACLES ====================

COARSE = {"target_h": 0.25, "n_boundary": 32}


@pytest.mark.parametrize("law", [
    conductivity_log_law, dirichlet_inhom_log_law, mixer_cathode_log_law, mixer_anode_log_law,
])
def test_log_laws_on_coarse_disk(law):
    result = law(**COARSE)
    assert np.sign(result.fitted) == np.sign(result.predicted)
    assert result.relative_error < 0.3


def test_neumann_linear_law_on_coarse_disk():
    result = neumann_linear_law(**COARSE)
    assert np.sign(result.fitted) == np.sign(result.predicted)
    assert result.relative_error < 0.1


# ==================== FINITE DIFFERENCES ====================

@lru_cache(maxsize=None)
def _shape_cases(mode):
    smoothed, sharp = shape_problems(mode, 128, 0.25)
    return {name: (problem, arcs, index) for name, problem, arcs, index in smoothed + sharp}


@pytest.mark.parametrize("mode, name, tolerance", [
    ("integral", "conductivity_dirichlet", 1e-2),
    ("integral", "mixer_cathode", 1e-2),
    ("integral", "mixer_anode", 1e-2),
    ("integral", "elastic_support", 1e-2),
    ("integral", "neumann_region", 1e-2),
    ("integral", "helmholtz_impedance", 1e-2),
    ("integral", "clamp_load", 1e-2),
    ("collapsed", "conductivity_dirichlet", 5e-2),
    ("collapsed", "mixer_cathode", 5e-2),
    ("collapsed", "mixer_anode", 5e-2),
    ("collapsed", "elastic_support", 5e-2),
])
def test_shape_gradient_matches_finite_differences(mode, name, tolerance):
    problem, arcs, index = _shape_cases(mode)[name]
    assert finite_difference_error(problem, arcs, index) < tolerance
