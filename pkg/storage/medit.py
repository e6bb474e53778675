"""
MEDIT .mesh documents for 2D domain meshes and the screen disk.
Reading and writing go through meshio; only the provenance comments are handled here.
"""
import logging
import tempfile
from pathlib import Path
from typing import List, Union
import meshio
import numpy as np
from mesh2d.mesh import DiskSurfaceMesh, Mesh2D
from utils.errors import GeometryError

logger = logging.getLogger(__name__)

AnyMesh = Union[Mesh2D, DiskSurfaceMesh]

MEDIT_REF = "medit:ref"
RINGS_COMMENT = "rings"


def to_meshio(mesh: AnyMesh) -> meshio.Mesh:
    """
    meshio view of a mesh.

    2D meshes carry their boundary edges as a line block in loop order,
    labelled through medit:ref. The screen disk is lifted to z = 0.
    """
    n_tri = mesh.n_triangles
    if isinstance(mesh, DiskSurfaceMesh):
        points = np.column_stack([mesh.vertices, np.zeros(mesh.n_vertices)])
        cells = [("triangle", mesh.triangles)]
        refs = [np.zeros(n_tri, dtype=np.int64)]
    else:
        points = mesh.vertices
        cells = [("line", mesh.boundary_edges), ("triangle", mesh.triangles)]
        refs = [mesh.edge_labels.astype(np.int64), np.zeros(n_tri, dtype=np.int64)]
    return meshio.Mesh(points, cells, point_data={MEDIT_REF: np.zeros(mesh.n_vertices, dtype=np.int64)},
                       cell_data={MEDIT_REF: refs})


def render(mesh: meshio.Mesh, file_format: str, suffix: str, **kwargs) -> str:
    """Text of a meshio writer; meshio writes to paths, so a scratch file is used."""
    with tempfile.TemporaryDirectory() as scratch:
        path = Path(scratch) / f"document{suffix}"
        meshio.write(path, mesh, file_format=file_format, **kwargs)
        return path.read_text()


def format_medit(mesh: AnyMesh, header: str = "") -> str:
    """Render a mesh as a MEDIT document, header and ring count as leading comments."""
    comments = []
    if header:
        comments.append(f"# {header}")
    if isinstance(mesh, DiskSurfaceMesh):
        comments.append(f"# {RINGS_COMMENT} {mesh.n_rings}")
    body = render(to_meshio(mesh), "medit", ".mesh")
    return "".join(f"{line}\n" for line in comments) + body


def _rings(text: str) -> int:
    for line in text.splitlines():
        parts = line.lstrip("#").split()
        if line.startswith("#") and len(parts) == 2 and parts[0] == RINGS_COMMENT:
            return int(parts[1])
    return 0


def _split_loops(edges: np.ndarray) -> List[np.ndarray]:
    """Consecutive edges chain into one loop until the chain breaks."""
    loops, start = [], 0
    for i in range(1, len(edges) + 1):
        if i == len(edges) or edges[i, 0] != edges[i - 1, 1]:
            loops.append(np.arange(start, i))
            start = i
    return loops


def parse_medit(text: str) -> AnyMesh:
    """
    Read a document written by format_medit.

    Raises:
        GeometryError: For missing or malformed sections
    """
    with tempfile.TemporaryDirectory() as scratch:
        path = Path(scratch) / "document.mesh"
        path.write_text(text)
        try:
            document = meshio.read(path, file_format="medit")
        except (meshio.ReadError, ValueError, IndexError) as e:
            raise GeometryError(f"Malformed MEDIT document: {e}")

    triangles = document.cells_dict.get("triangle")
    if triangles is None or not len(triangles):
        raise GeometryError("MEDIT document needs Vertices and Triangles")
    vertices = np.asarray(document.points, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)

    if vertices.shape[1] == 3:
        if np.any(np.abs(vertices[:, 2]) > 0):
            raise GeometryError("Screen meshes must lie in the plane z = 0")
        return DiskSurfaceMesh(vertices[:, :2], triangles, _rings(text))

    edges = np.asarray(document.cells_dict.get("line", np.zeros((0, 2))), dtype=np.int64).reshape(-1, 2)
    labels = document.cell_data_dict.get(MEDIT_REF, {}).get("line", np.zeros(len(edges)))
    labels = np.asarray(labels, dtype=np.int64)
    loop_ids = np.zeros(len(edges), dtype=np.int64)
    for k, ids in enumerate(_split_loops(edges)):
        loop_ids[ids] = k
    mesh = Mesh2D(vertices, triangles, edges, labels, loop_ids)
    logger.debug(f"Parsed MEDIT mesh: {mesh.n_vertices} vertices, {mesh.n_boundary_edges} boundary edges")
    return mesh
