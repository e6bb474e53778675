import math
import numpy as np
import pytest
from bem import (
    assemble_screen, collapsed_rule, equilibrium_interpolant, half_space_surface_displacement, interaction_matrix,
    kelvin3d, kernel_by_name, kernel_eval, laplace2d_log, laplace3d, mindlin3d, nodal_data, polarization_tensor,
    singular_pair_integral, solve_screen
)
from bem.sweep import default_eta
from mesh2d import gen_screen_disk
from utils.errors import SingularityError, ValidationError


# ==================== KERNELS ====================

def test_kernel_values_at_unit_distance():
    assert kernel_eval(laplace3d(), [1.0, 0.0], [0.0, 0.0]) == pytest.approx(0.0795775, abs=1e-7)
    assert kernel_eval(laplace2d_log(), [1.0, 0.0], [0.0, 0.0]) == pytest.approx(0.0, abs=1e-15)
    L = kernel_eval(mindlin3d(1.0, 0.3), [1.0, 0.0], [0.0, 0.0])
    assert L[2, 2] == pytest.approx(0.1114085, abs=1e-7)


def test_coincident_points_are_singular():
    with pytest.raises(SingularityError):
        kernel_eval(laplace3d(), [0.3, 0.3], [0.3, 0.3])


def test_kernel_symmetries():
    d = np.array([0.3, -0.4, 0.0])
    kelvin = kelvin3d(1.0, 2.0)
    np.testing.assert_allclose(kelvin.values(d), kelvin.values(d).T)
    np.testing.assert_allclose(kelvin.values(d), kelvin.values(-d))
    mindlin = mindlin3d(1.0, 0.3)
    np.testing.assert_allclose(mindlin.values(d), mindlin.values(-d).T)


def test_homogeneity_of_3d_kernels():
    d = np.array([0.3, -0.4])
    for kernel in (laplace3d(), kelvin3d(1.0, 1.0), mindlin3d(1.0, 0.25)):
        np.testing.assert_allclose(kernel.values(2.0 * d), kernel.values(d) / 2.0)
        np.testing.assert_allclose(kernel.direction_values(d / 0.5) / 0.5, kernel.values(d))
    with pytest.raises(ValidationError):
        laplace2d_log().direction_values(d)


def test_mindlin_matches_surface_displacements():
    mu, nu = 2.0, 0.35
    kernel = mindlin3d(mu, nu)
    x = np.array([0.1, -0.2, 0.0])
    y = np.array([0.7, 0.3, 0.0])
    L = kernel_eval(kernel, x, y)
    for load in np.eye(3):
        np.testing.assert_allclose(L.T @ load, half_space_surface_displacement(mu, nu, load, x, y), atol=1e-14)


def test_mindlin_rejects_points_off_the_plane():
    with pytest.raises(ValidationError):
        mindlin3d(1.0, 0.3).values(np.array([1.0, 0.0, 0.5]))


def test_kernel_by_name():
    assert kernel_by_name("kelvin3d", mu=2.0, lam=1.0).kelvin_constants[0] == pytest.approx(0.5 * (0.5 + 0.2))
    with pytest.raises(ValidationError):
        kernel_by_name("stokes")
    with pytest.raises(ValidationError):
        mindlin3d(1.0, 0.5)


# ==================== QUADRATURE ====================

def test_collapsed_rule_integrates_polynomials():
    for graded in (False, True):
        points, weights = collapsed_rule(6, graded)
        assert weights.sum() == pytest.approx(0.5)
        assert weights @ points[:, 0] == pytest.approx(1.0 / 6.0)
        assert weights @ (points[:, 0] * points[:, 1]) == pytest.approx(1.0 / 24.0, rel=1e-6)


def test_far_pair_transposes():
    a = np.array([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1]])
    b = a + np.array([1.0, 0.5])
    ab = singular_pair_integral(a, b, laplace3d())
    ba = singular_pair_integral(b, a, laplace3d())
    np.testing.assert_allclose(ab, ba.T, rtol=1e-12)
    # far pairs see the kernel at roughly the centroid distance
    centroid_distance = np.linalg.norm(b.mean(axis=0) - a.mean(axis=0))
    area = 0.005
    assert ab.sum() == pytest.approx(area ** 2 / (4 * math.pi * centroid_distance), rel=0.01)


def test_identical_pair_is_symmetric_and_positive():
    tri = np.array([[0.0, 0.0], [0.2, 0.0], [0.05, 0.15]])
    local = singular_pair_integral(tri, tri, laplace3d())
    np.testing.assert_allclose(local, local.T)
    assert np.all(local > 0)
    assert singular_pair_integral(tri, tri, laplace3d(), 0, 1) == pytest.approx(local[0, 1])


# ==================== SCREEN SOLVES ====================

def test_nodal_data_shapes():
    mesh = gen_screen_disk(2)
    assert nodal_data(mesh, 1.0, 1).shape == (mesh.n_vertices,)
    assert nodal_data(mesh, [0.0, 0.0, 1.0], 3).shape == (mesh.n_vertices, 3)
    with pytest.raises(ValidationError):
        nodal_data(mesh, [1.0, 2.0], 3)


def test_interaction_needs_3d_kernel():
    with pytest.raises(ValidationError):
        interaction_matrix(gen_screen_disk(2), laplace2d_log())


def test_equilibrium_interpolant_carries_ring_mass():
    mesh = gen_screen_disk(8)
    values = equilibrium_interpolant(mesh)
    assert values[0] == pytest.approx(4.0 / math.pi)
    assert np.all(np.isfinite(values))


@pytest.mark.slow
def test_equilibrium_solve_on_coarse_disk():
    mesh = gen_screen_disk(6)
    system = assemble_screen(mesh, laplace3d(), default_eta(mesh.h))
    density = solve_screen(system, 1.0)
    assert density.integral() == pytest.approx(8.0, rel=0.15)
    assert density.values[0] > 0
    ring = density.values[1:7]
    np.testing.assert_allclose(ring, ring.mean(), rtol=1e-2)
    zero = solve_screen(system, 0.0)
    assert not np.any(zero.values)


@pytest.mark.slow
def test_polarization_tensor_symmetries():
    mesh = gen_screen_disk(3)
    tensor = polarization_tensor(mesh, 1.0, 0.3, default_eta(mesh.h))
    assert np.all(np.diag(tensor.M) > 0)
    assert tensor.isotropy_defect < 0.1
    assert tensor.coupling_defect < 0.1
    assert tensor.to_dict()["provenance"]["nu"] == 0.3
