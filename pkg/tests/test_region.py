import math
import numpy as np
import pytest
from mesh2d import disk_arc_labels, gen_disk_domain, split_quality
from region import (
    InterfacePoint, admissible_vertices, advect, area, arcs_to_levelset, cont, descent_velocity,
    distance_to_region, empty_region, extend_velocity, extract_interface, fit_mesh_to_region, insert_disk,
    mask_fixed, redistance, transfer
)
from utils.constants import MIN_ANGLE_DEG
from utils.errors import NumericError, TopologyError, ValidationError


@pytest.fixture(scope="module")
def labeled_disk():
    """Disk with a fixed arc (label 1) around angle 0."""
    return gen_disk_domain(1.0, 64, 0.2, label_fn=disk_arc_labels(0.0, 0.3))


# ==================== LEVEL SETS ====================

def test_arc_area_and_interface(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.55, 1.45)])
    assert area(ls) == pytest.approx(0.9, abs=1e-12)
    interface = extract_interface(ls)
    assert [p.s for p in interface] == pytest.approx([0.55, 1.45])
    assert [p.conormal_sign for p in interface] == [-1, 1]
    assert cont(ls) == 2


def test_wrapping_arc(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(3.5, 0.5)])
    assert area(ls) == pytest.approx(1.0, abs=1e-12)
    assert ls.phi[0] < 0
    assert cont(ls) == 2


def test_empty_region(square_mesh):
    ls = empty_region(square_mesh)
    np.testing.assert_allclose(ls.phi, 2.0)
    assert area(ls) == 0.0
    assert cont(ls) == 0


def test_complement_area(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.3, 1.1), (2.2, 3.05)])
    other = redistance(ls.with_phi(-ls.phi))
    assert area(ls) + area(other) == pytest.approx(4.0, abs=1e-10)


def test_redistance_is_idempotent(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.3, 1.1), (2.2, 3.05)])
    once = redistance(ls.with_phi(3.0 * ls.phi))
    twice = redistance(once)
    np.testing.assert_allclose(twice.phi, once.phi, atol=1e-12)
    np.testing.assert_allclose(once.phi, ls.phi, atol=1e-12)


def test_interface_validation(square_mesh):
    with pytest.raises(TopologyError):
        distance_to_region(square_mesh, [InterfacePoint(1.0, (1.0, 0.0), -1)])
    same_sign = [InterfacePoint(0.5, (0.5, 0.0), -1), InterfacePoint(1.5, (1.0, 0.5), -1)]
    with pytest.raises(TopologyError):
        distance_to_region(square_mesh, same_sign)
    with pytest.raises(TopologyError):
        arcs_to_levelset(square_mesh, [(1.0, 1.0)])


# ==================== EVOLUTION ====================

def test_insert_disk_grows_region(square_mesh):
    ls = insert_disk(empty_region(square_mesh), 2.0, 0.3)
    assert area(ls) == pytest.approx(0.6, abs=1e-12)
    assert [p.s for p in extract_interface(ls)] == pytest.approx([1.7, 2.3])


def test_insert_disk_is_monotone(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.3, 1.1)])
    inserted = insert_disk(ls, 2.5, 0.2)
    assert np.all(inserted.phi <= ls.phi + 1e-12)
    assert cont(inserted) == 4


def test_insert_disk_rejects_large_radius(square_mesh):
    with pytest.raises(ValidationError):
        insert_disk(empty_region(square_mesh), 1.0, 1.5)


def test_advect_translates_region(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(1.05, 1.95)])
    moved = advect(ls, np.ones(ls.size), 0.5)
    s = [p.s for p in extract_interface(moved)]
    assert s == pytest.approx([1.55, 2.45], abs=0.02)
    assert area(moved) == pytest.approx(0.9, abs=0.04)


def test_advect_trivial_and_invalid(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(1.05, 1.95)])
    assert advect(ls, np.zeros(ls.size), 0.3) is ls
    assert advect(ls, np.ones(ls.size), 0.0) is ls
    with pytest.raises(NumericError):
        advect(ls, np.full(ls.size, np.nan), 0.1)
    with pytest.raises(ValidationError):
        advect(ls, np.ones(3), 0.1)
    with pytest.raises(ValidationError):
        advect(ls, np.ones(ls.size), -0.1)


def test_extend_velocity_single_point(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.55, 1.45)])
    interface = extract_interface(ls)[:1]
    np.testing.assert_allclose(extend_velocity(ls, interface, [2.5]), 2.5)
    assert np.all(extend_velocity(ls, [], []) == 0.0)


def test_descent_velocity_shrinks_for_positive_gradient(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.55, 1.45)])
    velocity = descent_velocity(ls, extract_interface(ls), [1.0, 1.0])
    start = int(np.argmin(np.abs(ls.s - 0.5)))
    end = int(np.argmin(np.abs(ls.s - 1.5)))
    assert velocity[start] > 0
    assert velocity[end] < 0
    shrunk = advect(ls, velocity, 0.1)
    assert area(shrunk) < area(ls)


def test_mask_fixed_removes_region_from_fixed_edges(labeled_disk):
    perimeter = labeled_disk.loop_perimeter()
    ls = arcs_to_levelset(labeled_disk, [(perimeter - 0.8, 0.8)])
    masked = mask_fixed(ls, labeled_disk)
    assert area(masked) < area(ls)
    ids = labeled_disk.loop_edge_ids()
    fixed_edge = labeled_disk.edge_labels[ids] != 0
    touches = fixed_edge | np.roll(fixed_edge, 1)
    assert np.all(masked.phi[touches] >= -1e-12)


def test_mask_fixed_leaves_free_region(labeled_disk):
    ls = arcs_to_levelset(labeled_disk, [(2.0, 3.0)])
    assert mask_fixed(ls, labeled_disk) is ls


def test_admissible_vertices_avoid_fixed_and_region(labeled_disk):
    perimeter = labeled_disk.loop_perimeter()
    ls = arcs_to_levelset(labeled_disk, [(2.0, 3.0)])
    delta = 0.1
    chosen = admissible_vertices(ls, labeled_disk, delta)
    assert len(chosen) > 0
    assert np.all(ls.phi[chosen] > delta)
    ids = labeled_disk.loop_edge_ids()
    fixed_edge = labeled_disk.edge_labels[ids] != 0
    assert not np.any(fixed_edge[chosen])
    assert not np.any(np.roll(fixed_edge, 1)[chosen])
    assert len(admissible_vertices(ls, labeled_disk, 0.5 * perimeter)) == 0


# ==================== FITTING ====================

def test_fit_splits_edges_at_interface(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.55, 1.45)])
    fitted = fit_mesh_to_region(square_mesh, ls)
    fitted.mesh.audit()
    assert fitted.mesh.n_vertices == square_mesh.n_vertices + 2
    assert fitted.mesh.edge_lengths[fitted.tags].sum() == pytest.approx(0.9, abs=1e-12)
    assert [p.s for p in fitted.interface] == pytest.approx([0.55, 1.45])
    np.testing.assert_array_equal(fitted.mesh.vertices[:square_mesh.n_vertices], square_mesh.vertices)


def test_fit_snaps_close_points(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.51, 1.5)])
    fitted = fit_mesh_to_region(square_mesh, ls)
    assert fitted.mesh.n_vertices == square_mesh.n_vertices
    assert fitted.mesh.edge_lengths[fitted.tags].sum() == pytest.approx(1.0, abs=1e-12)


def _has_vertex(mesh, point):
    return bool(np.any(np.all(np.isclose(mesh.vertices, point), axis=1)))


def test_refit_collapses_stale_vertex(square_mesh):
    first = fit_mesh_to_region(square_mesh, arcs_to_levelset(square_mesh, [(0.5625, 1.45)]))
    moved = arcs_to_levelset(first.mesh, [(0.535, 1.45)])
    edge, t, _ = first.mesh.point_on_loop(0.535)
    assert split_quality(first.mesh, edge, t) < MIN_ANGLE_DEG

    refit = fit_mesh_to_region(first.mesh, moved, base_vertices=square_mesh.n_vertices)
    refit.mesh.audit()
    assert refit.mesh.n_vertices == square_mesh.n_vertices + 2
    assert not _has_vertex(refit.mesh, [0.5625, 0.0])
    assert _has_vertex(refit.mesh, [0.535, 0.0])
    assert [p.s for p in refit.interface] == pytest.approx([0.535, 1.45])
    assert refit.mesh.edge_lengths[refit.tags].sum() == pytest.approx(0.915, abs=1e-12)


def test_refit_keeps_input_vertices_by_default(square_mesh):
    first = fit_mesh_to_region(square_mesh, arcs_to_levelset(square_mesh, [(0.5625, 1.45)]))
    refit = fit_mesh_to_region(first.mesh, arcs_to_levelset(first.mesh, [(0.535, 1.45)]))
    assert refit.mesh.n_vertices == square_mesh.n_vertices + 3
    assert _has_vertex(refit.mesh, [0.5625, 0.0])
    assert [p.s for p in refit.interface] == pytest.approx([0.535, 1.45])


def test_fit_empty_region(square_mesh):
    fitted = fit_mesh_to_region(square_mesh, empty_region(square_mesh))
    assert not fitted.tags.any()
    assert fitted.interface == []


def test_transfer_to_fitted_mesh(square_mesh):
    ls = arcs_to_levelset(square_mesh, [(0.55, 1.45)])
    fitted = fit_mesh_to_region(square_mesh, ls)
    moved = transfer(ls, fitted.mesh)
    assert moved.size == ls.size + 2
    assert area(moved) == pytest.approx(area(ls), abs=1e-12)
    assert math.isclose(moved.perimeter, ls.perimeter)
