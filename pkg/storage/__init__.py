"""
Artifact formats (MEDIT, VTK, CSV, JSON) and the asynchronous artifact store.
"""
from .medit import format_medit, parse_medit
from .vtk import format_vtk
from .tables import format_csv, header_hash, parse_csv
from .files import ArtifactStore

__all__ = [
    "format_medit", "parse_medit", "format_vtk",
    "format_csv", "header_hash", "parse_csv", "ArtifactStore",
]
