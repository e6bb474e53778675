"""
Legacy ASCII VTK documents for meshes, nodal fields and screen densities, written with meshio.
"""
from typing import Dict, Mapping, Optional
import meshio
import numpy as np
from storage.medit import render
from utils.errors import ConsistencyError

VTK_VERSION = "4.2"


def _real_arrays(name: str, values: np.ndarray):
    """Split complex data into _re and _im arrays."""
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return [(f"{name}_re", values.real), (f"{name}_im", values.imag)]
    return [(name, values)]


def _point_data(point_data: Optional[Mapping[str, np.ndarray]], n: int) -> Dict[str, np.ndarray]:
    arrays = {}
    for key in sorted(point_data or {}):
        for name, values in _real_arrays(key, point_data[key]):
            values = np.asarray(values, dtype=float)
            if values.shape[0] != n:
                raise ConsistencyError(f"Point data '{name}' has {values.shape[0]} entries for {n} points")
            if values.ndim == 2:
                # vectors are written with three components
                padded = np.zeros((n, 3))
                padded[:, :values.shape[1]] = values
                values = padded
            arrays[name] = values
    return arrays


def format_vtk(mesh, point_data: Optional[Mapping[str, np.ndarray]] = None, header: str = "") -> str:
    """
    UNSTRUCTURED_GRID of the triangles in z = 0 with optional nodal data.

    The header replaces the title line, so the config hash sits on line two.
    """
    points = np.column_stack([mesh.vertices[:, :2], np.zeros(mesh.n_vertices)])
    document = meshio.Mesh(points, [("triangle", mesh.triangles)],
                           point_data=_point_data(point_data, mesh.n_vertices))
    lines = render(document, "vtk" + VTK_VERSION.replace(".", ""), ".vtk", binary=False).splitlines()
    if header:
        lines[1] = header.replace("\n", " ")[:255]
    return "\n".join(lines) + "\n"
