"""
Artifact store: every file written by a command goes through here.
Writes are asynchronous so that handlers can overlap them with computation.
"""
import json
import logging
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Optional, Sequence
import aiofiles
import numpy as np
from storage.medit import format_medit
from storage.tables import format_csv
from storage.vtk import format_vtk
from utils.constants import FORMAT_CSV, FORMAT_JSON, FORMAT_MEDIT, FORMAT_VTK, OUTPUT_FORMATS
from utils.formatters import format_header_comment

logger = logging.getLogger(__name__)


def _plain(value: Any) -> Any:
    """Convert numpy values and containers into JSON-compatible data."""
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


class ArtifactStore:
    """
    Output directory of one command run.

    Every artifact carries the config hash: as a header comment in text
    formats and as a config_hash field in JSON documents. Writes in a
    format outside formats are skipped and return None.
    """

    def __init__(self, directory: str, config_hash: str, formats: Sequence[str] = tuple(OUTPUT_FORMATS)):
        self.directory = Path(directory)
        self.config_hash = config_hash
        self.formats = frozenset(formats)
        self.written: List[Path] = []

    def path(self, name: str) -> Path:
        return self.directory / name

    def enabled(self, fmt: str) -> bool:
        return fmt in self.formats

    async def write_text(self, name: str, text: str, fmt: Optional[str] = None) -> Optional[Path]:
        if fmt is not None and not self.enabled(fmt):
            logger.debug(f"Skipped {name}: format {fmt} is not enabled")
            return None
        path = self.path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        async with aiofiles.open(path, "w", encoding="utf-8", newline="") as f:
            await f.write(text)
        self.written.append(path)
        logger.debug(f"Wrote {path} ({len(text)} bytes)")
        return path

    async def write_json(self, name: str, document: Mapping) -> Optional[Path]:
        payload = dict(_plain(document))
        payload["config_hash"] = self.config_hash
        return await self.write_text(name, json.dumps(payload, indent=2, sort_keys=True) + "\n", FORMAT_JSON)

    async def write_csv(self, name: str, rows: Iterable[Mapping], columns: Sequence[str],
                        title: str = "") -> Optional[Path]:
        return await self.write_text(name, format_csv(rows, columns, self.config_hash, title), FORMAT_CSV)

    async def write_mesh(self, name: str, mesh, point_data: Optional[Mapping[str, np.ndarray]] = None,
                         title: str = "") -> List[Path]:
        """Write <name>.mesh and <name>.vtk, as far as their formats are enabled."""
        header = format_header_comment(self.config_hash, title)
        paths = []
        if self.enabled(FORMAT_MEDIT):
            paths.append(await self.write_text(f"{name}.mesh", format_medit(mesh, header)))
        if self.enabled(FORMAT_VTK):
            paths.append(await self.write_text(f"{name}.vtk", format_vtk(mesh, point_data, header)))
        return paths

    async def write_vtk(self, name: str, mesh, point_data: Optional[Mapping[str, np.ndarray]] = None,
                        title: str = "") -> Optional[Path]:
        if not self.enabled(FORMAT_VTK):
            return None
        header = format_header_comment(self.config_hash, title)
        return await self.write_text(f"{name}.vtk", format_vtk(mesh, point_data, header))
