import numpy as np
import pytest
from region import arcs_to_levelset, empty_region
from smoothing import default_profile, robin_coefficient
from utils.errors import ConsistencyError, ValidationError


# ==================== PROFILE ====================

def test_profile_plateaus_and_midpoint():
    h = default_profile()
    np.testing.assert_allclose(h([-3.0, -1.0, 0.0, 1.0, 3.0]), [1.0, 1.0, 0.5, 0.0, 0.0])
    np.testing.assert_allclose(h.prime([-2.0, 2.0]), 0.0)
    assert float(h.prime(0.0)) == pytest.approx(-0.75)


def test_profile_monotone_and_derivative_matches():
    h = default_profile()
    t = np.linspace(-1.5, 1.5, 301)
    assert np.all(np.diff(h(t)) <= 1e-15)
    step = 1e-6
    numeric = (h(t + step) - h(t - step)) / (2 * step)
    np.testing.assert_allclose(h.prime(t), numeric, atol=1e-5)


# ==================== ROBIN COEFFICIENT ====================

def test_scaled_coefficient(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.55, 1.45)])
    robin = robin_coefficient(ls, 0.1)
    middle = int(np.argmin(np.abs(ls.s - 1.0)))
    far = int(np.argmin(np.abs(ls.s - 3.0)))
    assert robin.values[middle] == pytest.approx(10.0)
    assert robin.values[far] == 0.0
    assert robin.scale == pytest.approx(10.0)
    assert not robin.capped


def test_unscaled_coefficient(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.55, 1.45)])
    robin = robin_coefficient(ls, 0.1, prefactor="unscaled")
    assert robin.values.max() == pytest.approx(1.0)
    assert robin.scale == 1.0


def test_coefficient_cap(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.55, 1.45)])
    robin = robin_coefficient(ls, 0.1, cap=5.0)
    assert robin.capped
    assert robin.values.max() == pytest.approx(5.0)
    assert np.all(robin.slope[robin.values >= 5.0] == 0.0)


def test_zones_and_sensitivity(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.55, 1.45)])
    robin = robin_coefficient(ls, 0.2)
    start = int(np.argmin(np.abs(ls.s - 0.5)))
    end = int(np.argmin(np.abs(ls.s - 1.5)))
    assert robin.zone[start] == 0
    assert robin.zone[end] == 1
    sensitivity = robin.interface_sensitivity(0)
    assert sensitivity[start] == pytest.approx(-robin.slope[start])
    assert sensitivity[end] == 0.0
    assert np.all(robin_coefficient(empty_region(square_mesh), 0.2).zone == -1)


def test_edge_values_follow_loop(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.55, 1.45)])
    robin = robin_coefficient(ls, 0.1)
    pairs = robin.edge_values(square_mesh)
    assert pairs.shape == (square_mesh.n_boundary_edges, 2)
    np.testing.assert_allclose(pairs[:, 1], np.roll(pairs[:, 0], -1))
    with pytest.raises(ConsistencyError):
        robin.edge_values(square_mesh, per_vertex=np.ones(3))


def test_invalid_parameters(square_mesh):
    ls = empty_region(square_mesh)
    with pytest.raises(ValidationError):
        robin_coefficient(ls, 0.0)
    with pytest.raises(ValidationError):
        robin_coefficient(ls, 0.1, prefactor="bogus")
