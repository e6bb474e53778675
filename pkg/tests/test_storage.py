import asyncio
import json
import numpy as np
import pytest
from mesh2d import gen_screen_disk
from mesh2d.mesh import DiskSurfaceMesh
from storage import (
    ArtifactStore, format_csv, format_medit, format_vtk, header_hash, parse_csv, parse_medit
)
from utils.errors import ConsistencyError, GeometryError


# ==================== MEDIT ====================

def test_medit_keeps_labels_and_loop_order(square_mesh):
    text = format_medit(square_mesh, "config-hash: abc")
    assert text.splitlines()[0] == "# config-hash: abc"
    assert header_hash(text) == "abc"
    mesh = parse_medit(text)
    np.testing.assert_array_equal(mesh.triangles, square_mesh.triangles)
    np.testing.assert_array_equal(mesh.boundary_edges, square_mesh.boundary_edges)
    np.testing.assert_array_equal(mesh.edge_labels, square_mesh.edge_labels)
    np.testing.assert_array_equal(mesh.vertices, square_mesh.vertices)
    assert set(mesh.edge_loops.tolist()) == {0}


def test_medit_screen_disk():
    disk = gen_screen_disk(3)
    text = format_medit(disk)
    assert "Dimension 3" in text
    assert "Edges" not in text
    mesh = parse_medit(text)
    assert isinstance(mesh, DiskSurfaceMesh)
    assert mesh.n_rings == 3
    assert mesh.n_vertices == 37


def test_medit_rejects_broken_documents():
    with pytest.raises(GeometryError):
        parse_medit("MeshVersionFormatted 2\nDimension 2\nVertices\n1\n0 0 0\nEnd\n")
    with pytest.raises(GeometryError):
        parse_medit("Dimension 2\nVertices\n3\n0 0 0\n1 0 0\nTriangles\n1\n1 2 3 0\nEnd\n")


# ==================== VTK ====================

def test_vtk_mesh_with_fields(square_mesh):
    n = square_mesh.n_vertices
    text = format_vtk(square_mesh, {"u": np.ones(n), "w": np.full(n, 1 + 2j), "v": np.zeros((n, 2))},
                      "config-hash: abc")
    lines = text.splitlines()
    assert lines[0].startswith("# vtk DataFile Version")
    assert lines[1] == "config-hash: abc"
    assert header_hash("\n".join(lines[1:])) == "abc"
    assert lines[3] == "DATASET UNSTRUCTURED_GRID"
    assert "CELLS 128 512" in lines
    assert f"POINT_DATA {n}" in lines
    assert f"w_re 1 {n} double" in lines and f"w_im 1 {n} double" in lines
    assert f"v 3 {n} double" in lines


def test_vtk_rejects_mismatched_field(square_mesh):
    with pytest.raises(ConsistencyError):
        format_vtk(square_mesh, {"u": np.ones(3)})


def test_vtk_screen_disk():
    disk = gen_screen_disk(2)
    text = format_vtk(disk, {"phi": np.zeros(disk.n_vertices)}, "config-hash: 0123")
    lines = text.splitlines()
    assert "DATASET UNSTRUCTURED_GRID" in lines
    assert f"CELLS {disk.n_triangles} {4 * disk.n_triangles}" in lines
    assert f"phi 1 {disk.n_vertices} double" in lines
    assert lines[1] == "config-hash: 0123"


# ==================== CSV ====================

def test_csv_layout():
    rows = [{"iter": 0, "J": 0.1, "event": "initial"}, {"iter": 1, "J": np.float64(0.05), "event": "geometric"}]
    text = format_csv(rows, ["iter", "J", "event"], "feedbeef", "history")
    lines = text.split("\r\n")
    assert lines[0] == "# config-hash: feedbeef history"
    assert lines[1] == "iter,J,event"
    assert lines[2] == "0,0.10000000000000001,initial"
    assert header_hash(text) == "feedbeef"
    parsed = parse_csv(text)
    assert [row["event"] for row in parsed] == ["initial", "geometric"]
    assert float(parsed[1]["J"]) == 0.05


def test_header_hash_absent():
    assert header_hash("") == ""
    assert header_hash("iter,J\n") == ""


# ==================== ARTIFACT STORE ====================

def test_artifact_store_writes(tmp_path, square_mesh):
    store = ArtifactStore(str(tmp_path / "run"), "0123456789abcdef")

    async def write_all():
        await store.write_json("result.json", {"M": np.eye(2), "value": np.float64(1.5), "z": 1 + 1j})
        await store.write_csv("history.csv", [{"iter": 0, "J": 1.0}], ["iter", "J"])
        return await store.write_mesh("final", square_mesh, {"u": np.zeros(square_mesh.n_vertices)})

    paths = asyncio.run(write_all())
    assert [p.name for p in paths] == ["final.mesh", "final.vtk"]
    assert len(store.written) == 4

    document = json.loads((tmp_path / "run" / "result.json").read_text())
    assert document["config_hash"] == "0123456789abcdef"
    assert document["M"] == [[1.0, 0.0], [0.0, 1.0]]
    assert document["z"] == {"re": 1.0, "im": 1.0}
    assert header_hash((tmp_path / "run" / "history.csv").read_text()) == "0123456789abcdef"
    assert header_hash((tmp_path / "run" / "final.mesh").read_text()) == "0123456789abcdef"


def test_artifact_store_skips_disabled_formats(tmp_path, square_mesh):
    store = ArtifactStore(str(tmp_path / "run"), "0123456789abcdef", ["json"])

    async def write_all():
        csv_path = await store.write_csv("history.csv", [{"iter": 0}], ["iter"])
        mesh_paths = await store.write_mesh("final", square_mesh)
        vtk_path = await store.write_vtk("fields", square_mesh)
        await store.write_json("result.json", {"value": 1.0})
        return csv_path, mesh_paths, vtk_path

    csv_path, mesh_paths, vtk_path = asyncio.run(write_all())
    assert csv_path is None and vtk_path is None
    assert mesh_paths == []
    assert sorted(p.name for p in (tmp_path / "run").iterdir()) == ["result.json"]
    assert store.written == [tmp_path / "run" / "result.json"]


def test_medit_only_store_writes_mesh_without_vtk(tmp_path, square_mesh):
    store = ArtifactStore(str(tmp_path), "feed", ["medit"])
    paths = asyncio.run(store.write_mesh("mesh", square_mesh))
    assert [p.name for p in paths] == ["mesh.mesh"]
    assert parse_medit(paths[0].read_text()).n_triangles == square_mesh.n_triangles
