import math
import numpy as np
import pytest
from mesh2d import (
    collapse_boundary_vertex, disk_arc_labels, gen_disk_domain, gen_screen_disk, gen_square_domain, n_rings_for_h,
    split_boundary_edge
)
from utils.errors import GeometryError, ValidationError


# ==================== GENERATORS ====================

def test_square_mesh_sizes_and_labels(square_mesh):
    assert square_mesh.n_vertices == 81
    assert square_mesh.n_triangles == 128
    assert square_mesh.n_boundary_edges == 32
    assert square_mesh.total_area == pytest.approx(1.0)
    np.testing.assert_array_equal(np.unique(square_mesh.edge_labels), [1, 2, 3, 4])
    assert np.all(square_mesh.edge_labels[:8] == 1)
    square_mesh.audit()


def test_square_boundary_runs_counter_clockwise(square_mesh):
    assert square_mesh.polygon_area() == pytest.approx(1.0)
    assert square_mesh.loop_perimeter() == pytest.approx(4.0)
    np.testing.assert_allclose(square_mesh.vertices[square_mesh.boundary_edges[0, 0]], [0.0, 0.0])


def test_disk_mesh_reproduces_polygon(disk_mesh):
    disk_mesh.audit()
    assert disk_mesh.n_loops == 1
    assert disk_mesh.n_boundary_edges == 64
    assert disk_mesh.polygon_area() == pytest.approx(32.0 * math.sin(2.0 * math.pi / 64), rel=1e-12)
    assert disk_mesh.total_area == pytest.approx(disk_mesh.polygon_area(), rel=1e-10)


def test_disk_normals_point_outward(disk_mesh):
    dots = (disk_mesh.edge_normals * disk_mesh.edge_midpoints).sum(axis=1)
    assert np.all(dots > 0)


def test_graded_disk_has_exact_arc_vertices():
    mesh = gen_disk_domain(1.0, 64, 0.2, focus_angle=0.5 * math.pi, h_min=0.01, exact_arcs=(0.05,))
    mesh.audit()
    start = mesh.vertices[mesh.boundary_edges[0, 0]]
    np.testing.assert_allclose(start, [0.0, 1.0], atol=1e-12)
    assert np.any(np.isclose(mesh.loop_arclength(), 0.05, atol=1e-3))
    assert mesh.edge_lengths.min() < 0.02


def test_disk_labels_from_label_function():
    mesh = gen_disk_domain(1.0, 64, 0.2, label_fn=disk_arc_labels(0.0, 0.3))
    midpoints = mesh.edge_midpoints
    right = midpoints[:, 0] > 0.99
    assert np.all(mesh.edge_labels[right] == 1)
    assert np.all(mesh.edge_labels[midpoints[:, 0] < 0] == 0)


def test_disk_vertex_density():
    mesh = gen_disk_domain(2.0, 128, 0.05)
    expected = math.pi * 4.0 / (math.sqrt(3.0) / 2.0 * 0.05 ** 2)
    assert 0.7 * expected < mesh.n_vertices < 1.3 * expected
    assert mesh.n_boundary_edges == 128


def test_generator_rejects_bad_parameters():
    with pytest.raises(ValidationError):
        gen_disk_domain(1.0, 4, 0.2)
    with pytest.raises(ValidationError):
        gen_disk_domain(1.0, 64, 2.0)
    with pytest.raises(ValidationError):
        gen_square_domain(1.0, -0.1)


def test_screen_disk_counts():
    for n in (1, 3, 6):
        mesh = gen_screen_disk(n)
        assert mesh.n_vertices == 1 + 3 * n * (n + 1)
        assert mesh.n_triangles == 6 * n * n
        assert len(mesh.boundary_vertices) == 6 * n
        assert mesh.areas.sum() < math.pi
        mesh.audit()


def test_n_rings_for_h():
    assert n_rings_for_h(0.1) == 10
    assert n_rings_for_h(5.0) == 1


# ==================== EDITING ====================

def test_split_boundary_edge_keeps_mesh_valid(square_mesh):
    split = split_boundary_edge(square_mesh, 0, 0.5)
    split.audit()
    assert split.n_vertices == square_mesh.n_vertices + 1
    assert split.n_triangles == square_mesh.n_triangles + 1
    assert split.n_boundary_edges == square_mesh.n_boundary_edges + 1
    assert split.total_area == pytest.approx(1.0)
    np.testing.assert_allclose(split.vertices[-1], [1.0 / 16, 0.0])
    assert split.boundary_edges[0, 1] == square_mesh.n_vertices
    assert split.edge_labels[1] == square_mesh.edge_labels[0]
    assert split.loop_perimeter() == pytest.approx(4.0)


@pytest.mark.parametrize("t", [0.0, 1.0, -0.2])
def test_split_rejects_endpoints(square_mesh, t):
    with pytest.raises(ValidationError):
        split_boundary_edge(square_mesh, 0, t)


def test_collapse_undoes_split(square_mesh):
    collapsed = collapse_boundary_vertex(split_boundary_edge(square_mesh, 0, 0.5), square_mesh.n_vertices)
    collapsed.audit()
    np.testing.assert_array_equal(collapsed.vertices, square_mesh.vertices)
    np.testing.assert_array_equal(collapsed.triangles, square_mesh.triangles)
    np.testing.assert_array_equal(collapsed.boundary_edges, square_mesh.boundary_edges)
    np.testing.assert_array_equal(collapsed.edge_labels, square_mesh.edge_labels)


@pytest.mark.parametrize("vertex", [0, 1])
def test_collapse_rejects_original_vertices(square_mesh, vertex):
    with pytest.raises(GeometryError):
        collapse_boundary_vertex(square_mesh, vertex)


def test_with_labels_checks_shape(square_mesh):
    with pytest.raises(GeometryError):
        square_mesh.with_labels(np.zeros(3))


def test_point_on_loop(square_mesh):
    edge, t, point = square_mesh.point_on_loop(1.5)
    np.testing.assert_allclose(point, [1.0, 0.5], atol=1e-12)
    assert square_mesh.edge_labels[edge] == 2
    assert 0.0 <= t <= 1.0
