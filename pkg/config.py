"""
Configuration: environment settings and the JSON run configuration.
"""
import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator
import pydantic
from optimizer.models import OptConfig
from utils.constants import CONFIG_HASH_LENGTH, OUTPUT_FORMATS, PROBLEM_CONDUCTIVITY
from utils.errors import ConfigError, ValidationError
from utils.expressions import Polynomial

# Load environment variables
load_dotenv()


@dataclass
class Settings:
    threads: int
    log_level: str
    output_dir: str


# Get settings from environment


def get_settings() -> Settings:
    threads = os.getenv('BCOPT_THREADS')
    if threads is None or threads == "":
        count = os.cpu_count() or 1
    else:
        try:
            count = int(threads)
        except ValueError:
            raise ValueError(f"BCOPT_THREADS must be a positive integer, got {threads!r}")
        if count < 1:
            raise ValueError(f"BCOPT_THREADS must be a positive integer, got {threads!r}")

    return Settings(
        threads=count,
        log_level=os.getenv('BCOPT_LOG_LEVEL', 'INFO').upper(),
        output_dir=os.getenv('BCOPT_OUTPUT_DIR', 'output'),
    )


settings = get_settings()


# ==================== RUN CONFIGURATION ====================

Expression = Union[float, str]
Arc = Tuple[float, float]


def expression(value: Expression) -> Polynomial:
    """Polynomial of a config expression (numbers become constants)."""
    return Polynomial.parse(value)


def _check_expression(value, info: ValidationInfo):
    if value is None:
        return value
    try:
        Polynomial.parse(value, info.field_name)
    except ValidationError as e:
        raise ValueError(e.message)
    return value


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FixedArc(_Section):
    """Boundary edges within half_width (arclength) of the point at angle carry label."""
    angle: float
    half_width: float = Field(gt=0)
    label: int = Field(ge=1)


class MeshSection(_Section):
    shape: Literal["disk", "square", "screen-disk"] = "disk"
    size: float = Field(1.0, gt=0)
    target_h: float = Field(0.1, gt=0)
    n_boundary: Optional[int] = Field(None, ge=3)
    fixed: List[FixedArc] = []
    side_labels: Tuple[int, int, int, int] = (0, 0, 0, 0)


class PhysicsSection(_Section):
    model: Literal["conductivity", "helmholtz", "elasticity"] = "conductivity"
    gamma: Expression = 1.0
    f: Expression = 1.0
    f_vector: Optional[Tuple[Expression, Expression]] = None
    g: Dict[int, Expression] = {}
    traction: Dict[int, Tuple[float, float]] = {}
    E: float = Field(1.0, gt=0)
    nu: float = Field(0.3, gt=0, lt=0.5)
    k: float = Field(1.0, gt=0)
    Z: float = Field(1.0, gt=0)
    u_in: float = 1.0
    region_kind: Literal["dirichlet", "neumann"] = "dirichlet"
    g_region: float = 1.0
    dirichlet_label: Optional[int] = None
    pressure: float = 1.0
    clamp_label: int = 1

    @field_validator("gamma", "f")
    @classmethod
    def check_expression(cls, value, info: ValidationInfo):
        return _check_expression(value, info)

    @field_validator("g")
    @classmethod
    def check_fluxes(cls, value, info: ValidationInfo):
        for item in value.values():
            _check_expression(item, info)
        return value

    @field_validator("f_vector")
    @classmethod
    def check_vector(cls, value, info: ValidationInfo):
        for item in value or ():
            _check_expression(item, info)
        return value


def _check_arcs(arcs: List[Arc]) -> List[Arc]:
    for start, end in arcs:
        if start == end:
            raise ValueError(f"arc ({start}, {end}) has zero length")
    return arcs


class RegionSection(_Section):
    arcs: List[Arc] = []
    anode_arcs: List[Arc] = []

    @field_validator("arcs", "anode_arcs")
    @classmethod
    def check_arcs(cls, value):
        return _check_arcs(value)


class ObjectiveSection(_Section):
    name: Literal["u2", "abs2", "linear", "neg_energy", "mean_square"] = "u2"
    weight: float = 1.0
    ell: float = Field(0.0, ge=0)
    m: float = Field(0.0, ge=0)


class SmoothingSection(_Section):
    eps_smooth: float = Field(0.05, gt=0)
    robin_prefactor: Literal["scaled", "unscaled"] = "scaled"


class OptimizerSection(_Section):
    problem: Literal["conductivity", "mixer", "helmholtz", "elasticity-support", "clamp"] = PROBLEM_CONDUCTIVITY
    eps_top: Optional[float] = Field(None, gt=0)
    delta_excl: Optional[float] = Field(None, ge=0)
    n_top: int = Field(10, ge=1)
    n_top_stop: int = Field(0, ge=0)
    max_iter: int = Field(50, ge=0)
    tau0: float = Field(0.1, gt=0)
    backtrack_factor: float = Field(0.5, gt=0, lt=1)
    max_backtracks: int = Field(8, ge=0)
    tolerance: float = Field(1e-6, ge=0)
    shape_gradient_mode: Literal["integral", "collapsed"] = "integral"
    topo_guard: bool = False


class OutputSection(_Section):
    directory: Optional[str] = None
    formats: List[Literal["vtk", "medit", "csv", "json"]] = list(OUTPUT_FORMATS)
    snapshots: bool = False


class RunConfig(_Section):
    """A complete experiment: mesh, physics, initial region, objective, smoothing, loop and outputs."""
    mesh: MeshSection = Field(default_factory=MeshSection)
    physics: PhysicsSection = Field(default_factory=PhysicsSection)
    region: RegionSection = Field(default_factory=RegionSection)
    objective: ObjectiveSection = Field(default_factory=ObjectiveSection)
    smoothing: SmoothingSection = Field(default_factory=SmoothingSection)
    optimizer: OptimizerSection = Field(default_factory=OptimizerSection)
    output: OutputSection = Field(default_factory=OutputSection)

    def opt_config(self) -> OptConfig:
        section = self.optimizer
        return OptConfig(
            problem=section.problem,
            ell=self.objective.ell,
            m=self.objective.m,
            eps_smooth=self.smoothing.eps_smooth,
            eps_top=section.eps_top,
            delta_excl=section.delta_excl,
            n_top=section.n_top,
            n_top_stop=section.n_top_stop,
            max_iter=section.max_iter,
            tau0=section.tau0,
            backtrack_factor=section.backtrack_factor,
            max_backtracks=section.max_backtracks,
            tolerance=section.tolerance,
            shape_gradient_mode=section.shape_gradient_mode,
            robin_prefactor=self.smoothing.robin_prefactor,
            topo_guard=section.topo_guard,
        )

    def output_directory(self) -> str:
        return self.output.directory or settings.output_dir


def _describe(error: pydantic.ValidationError) -> Tuple[str, str]:
    parts, first_key = [], None
    for item in error.errors():
        key = ".".join(str(part) for part in item["loc"])
        first_key = first_key or key
        parts.append(f"{key}: {item['msg']}")
    return "; ".join(parts), first_key


def parse_run_config(document: dict) -> RunConfig:
    """
    Validate a decoded JSON document.

    Raises:
        ConfigError: With the key path of the first violation
    """
    try:
        return RunConfig.model_validate(document)
    except pydantic.ValidationError as e:
        message, key = _describe(e)
        raise ConfigError(message, key)


def load_run_config(path: str) -> RunConfig:
    """
    Read and validate a JSON run configuration.

    Raises:
        ConfigError: For unreadable files, invalid JSON (with line number) and schema violations
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}")
    if not isinstance(document, dict):
        raise ConfigError(f"{path}: the top level must be a JSON object")
    return parse_run_config(document)


def hash_document(document: dict) -> str:
    """First 16 hex digits of the SHA-256 of the canonical JSON form."""
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:CONFIG_HASH_LENGTH]


def config_hash(run_config: RunConfig) -> str:
    return hash_document(run_config.model_dump(mode="json"))
