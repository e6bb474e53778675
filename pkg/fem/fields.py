"""
Data types shared by the finite-element solvers.
Fields, boundary-condition specifications, arclength-interval data and objectives.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Optional, Sequence, Tuple, Union
import numpy as np
from mesh2d.mesh import Mesh2D
from region.levelset import BoundaryLevelSet, extract_interface
from utils.constants import OBJECTIVE_J_OF_GRAD, OBJECTIVE_J_OF_U, OBJECTIVE_KINDS, OBJECTIVE_MEAN_SQUARE
from utils.errors import ConsistencyError, NumericError, ValidationError
from utils.expressions import Polynomial
from utils.validators import validate_choice

logger = logging.getLogger(__name__)


# ==================== FIELDS ====================

@dataclass(frozen=True, eq=False)
class FemField:
    """
    Nodal P1 solution on a mesh.

    values has shape (n,) for scalar fields (real or complex) and (n, 2)
    for displacement fields. residual is the relative algebraic residual
    of the solve that produced it.
    """
    mesh: Mesh2D
    values: np.ndarray
    model: str
    eps: Optional[float] = None
    objective: Optional[str] = None
    residual: float = 0.0
    kind: str = "state"

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape[0] != self.mesh.n_vertices or values.ndim not in (1, 2):
            raise ConsistencyError(
                f"Field of shape {values.shape} does not match {self.mesh.n_vertices} vertices"
            )
        if not np.all(np.isfinite(values)):
            raise NumericError(f"{self.model} {self.kind} field contains non-finite values")

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == 2

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    @property
    def dofs(self) -> np.ndarray:
        """Flat degree-of-freedom vector (vertex-major for vector fields)."""
        return self.values.reshape(-1)

    def scaled(self, factor: float) -> "FemField":
        return replace(self, values=self.values * factor)


# ==================== DATA ON BOUNDARY INTERVALS ====================

@dataclass(frozen=True)
class IntervalData:
    """
    A constant datum carried by arclength intervals of one boundary loop.

    Intervals may wrap (start > end). With along_normal the datum is a
    scalar multiplying the outward edge normal, giving a vector traction.
    Integrals over partially covered edges are exact, so assembled terms
    vary smoothly with the interval endpoints.
    """
    intervals: Tuple[Tuple[float, float], ...]
    value: Any = 1.0
    loop: int = 0
    along_normal: bool = False

    @classmethod
    def from_levelset(cls, ls: BoundaryLevelSet, value: Any = 1.0, along_normal: bool = False) -> "IntervalData":
        """Intervals of the region G = {phi < 0} of a level set."""
        interface = extract_interface(ls)
        if not interface:
            whole = ((0.0, ls.perimeter),) if np.all(ls.phi < 0) else ()
            return cls(whole, value, ls.loop_ref, along_normal)
        # points with conormal -1 open G in the s direction
        starts = [k for k, p in enumerate(interface) if p.conormal_sign < 0]
        intervals = []
        for k in starts:
            end = interface[(k + 1) % len(interface)]
            intervals.append((interface[k].s, end.s))
        return cls(tuple(intervals), value, ls.loop_ref, along_normal)

    def with_value(self, value: Any) -> "IntervalData":
        return replace(self, value=value)

    def pieces(self, mesh: Mesh2D) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Covered parts of boundary edges.

        Returns:
            (edge ids, t0, t1) with 0 <= t0 < t1 <= 1 along each edge
        """
        ids = mesh.loop_edge_ids(self.loop)
        perimeter = mesh.loop_perimeter(self.loop)
        starts = mesh.arclength[ids]
        lengths = mesh.edge_lengths[ids]
        spans = []
        for a, b in self.intervals:
            a, b = float(a), float(b)
            if b - a >= perimeter:
                spans.append((0.0, perimeter))
                continue
            a, b = a % perimeter, b % perimeter
            if b > a:
                spans.append((a, b))
            else:
                spans.append((a, perimeter))
                spans.append((0.0, b))

        edges, t0, t1 = [], [], []
        for a, b in spans:
            lo = np.maximum(a, starts)
            hi = np.minimum(b, starts + lengths)
            covered = hi > lo
            edges.append(ids[covered])
            t0.append((lo[covered] - starts[covered]) / lengths[covered])
            t1.append((hi[covered] - starts[covered]) / lengths[covered])
        if not edges:
            return np.zeros(0, dtype=np.int64), np.zeros(0), np.zeros(0)
        return np.concatenate(edges), np.clip(np.concatenate(t0), 0, 1), np.clip(np.concatenate(t1), 0, 1)

    def measure(self, mesh: Mesh2D) -> float:
        edges, t0, t1 = self.pieces(mesh)
        return float(((t1 - t0) * mesh.edge_lengths[edges]).sum())


# ==================== BOUNDARY CONDITIONS ====================

EdgeInput = Union[None, float, complex, Mapping[int, Any], np.ndarray, IntervalData, Sequence]


def robin_eps(robin: EdgeInput) -> Optional[float]:
    """Smoothing width of the first RobinCoefficient in robin, which may be a list mixing kinds."""
    if isinstance(robin, (list, tuple)):
        values = [robin_eps(r) for r in robin]
        values = [v for v in values if v is not None]
        return values[0] if values else None
    return getattr(robin, "eps", None)


def _vertex_values(mesh: Mesh2D, value: Any, vector: bool) -> np.ndarray:
    """Nodal values of a constant, polynomial, callable or nodal array."""
    n = mesh.n_vertices
    shape = (n, 2) if vector else (n,)
    if isinstance(value, Polynomial):
        return value.at(mesh.vertices)
    if callable(value):
        return np.asarray(value(mesh.vertices)).reshape(shape)
    array = np.asarray(value)
    if array.shape == shape:
        return array
    return np.broadcast_to(array, shape).copy()


def edge_endpoint_values(mesh: Mesh2D, data: Any, vector: bool = False) -> np.ndarray:
    """
    Values at both ends of every boundary edge, shape (b, 2) or (b, 2, 2).

    Accepts None, a constant applied on every edge, a {label: value}
    mapping whose values are constants, polynomials or callables of
    points, or a ready (b, 2[, 2]) array.
    """
    b = mesh.n_boundary_edges
    shape = (b, 2, 2) if vector else (b, 2)
    if data is None:
        return np.zeros(shape)
    if isinstance(data, Mapping):
        out = np.zeros(shape, dtype=complex if any(np.iscomplexobj(v) for v in data.values()) else float)
        for label, value in data.items():
            edges = np.flatnonzero(mesh.edge_labels == int(label))
            if not len(edges):
                logger.debug(f"No boundary edges carry label {label}")
                continue
            nodal = _vertex_values(mesh, value, vector)
            out[edges, 0] = nodal[mesh.boundary_edges[edges, 0]]
            out[edges, 1] = nodal[mesh.boundary_edges[edges, 1]]
        return out
    array = np.asarray(data)
    if array.shape == shape:
        return array
    if array.ndim == 0 or (vector and array.shape == (2,)):
        return np.broadcast_to(array, shape).copy()
    raise ValidationError(f"Edge data of shape {array.shape} does not match {shape}", "boundary data")


@dataclass(frozen=True, eq=False)
class BcSpec:
    """
    Boundary conditions per boundary edge.

    Each edge carries exactly one condition: Dirichlet where dirichlet[e]
    is set, otherwise Robin  gamma du/dn + c u = g  with c (robin) and g
    (flux) linear along the edge; c = 0 gives Neumann. Interval terms add
    coefficients and fluxes on arclength intervals.
    """
    robin: np.ndarray
    flux: np.ndarray
    dirichlet: np.ndarray
    dirichlet_value: Any = 0.0
    interval_robin: Tuple[IntervalData, ...] = ()
    interval_flux: Tuple[IntervalData, ...] = ()
    components: Tuple[bool, bool] = (True, True)
    pinned: Tuple[Tuple[int, int], ...] = ()
    vector: bool = False

    @classmethod
    def natural(cls, mesh: Mesh2D, vector: bool = False) -> "BcSpec":
        """Homogeneous Neumann (traction-free) on every edge."""
        b = mesh.n_boundary_edges
        flux = np.zeros((b, 2, 2) if vector else (b, 2))
        return cls(np.zeros((b, 2)), flux, np.zeros(b, dtype=bool), vector=vector)

    def with_robin(self, mesh: Mesh2D, robin: EdgeInput) -> "BcSpec":
        """Add Robin coefficients (RobinCoefficient, edge array, IntervalData or a list of them)."""
        if robin is None:
            return self
        if isinstance(robin, (list, tuple)):
            spec = self
            for item in robin:
                spec = spec.with_robin(mesh, item)
            return spec
        if isinstance(robin, IntervalData):
            return replace(self, interval_robin=self.interval_robin + (robin,))
        if hasattr(robin, "edge_values"):
            values = robin.edge_values(mesh)
        else:
            values = edge_endpoint_values(mesh, robin)
        if np.any(np.real(values) < 0):
            raise ValidationError("Robin coefficients must be non-negative", "robin")
        return replace(self, robin=self.robin + values)

    def with_flux(self, mesh: Mesh2D, flux: EdgeInput) -> "BcSpec":
        """Add a boundary flux (or traction) g."""
        if flux is None:
            return self
        if isinstance(flux, (list, tuple)) and not (self.vector and len(flux) == 2 and np.isscalar(flux[0])):
            spec = self
            for item in flux:
                spec = spec.with_flux(mesh, item)
            return spec
        if isinstance(flux, IntervalData):
            return replace(self, interval_flux=self.interval_flux + (flux,))
        return replace(self, flux=self.flux + edge_endpoint_values(mesh, flux, self.vector))

    def with_dirichlet(self, tags: np.ndarray, value: Any = 0.0,
                       components: Tuple[bool, bool] = (True, True)) -> "BcSpec":
        """Impose u = value on the vertices of tagged edges (by lifting)."""
        tags = np.asarray(tags, dtype=bool)
        if tags.shape != self.dirichlet.shape:
            raise ValidationError(f"Expected {self.dirichlet.size} edge tags, got {tags.shape}", "tags")
        return replace(self, dirichlet=self.dirichlet | tags, dirichlet_value=value,
                       components=tuple(bool(c) for c in components))

    def with_pinned(self, vertex: int, component: int) -> "BcSpec":
        """Fix one displacement component of one vertex to zero."""
        return replace(self, pinned=self.pinned + ((int(vertex), int(component)),))

    @property
    def has_robin(self) -> bool:
        return bool(np.any(self.robin[~self.dirichlet] != 0)) or bool(self.interval_robin)

    @property
    def has_dirichlet(self) -> bool:
        return bool(self.dirichlet.any()) or bool(self.pinned)

    def condition(self, edge: int) -> str:
        """Name of the condition carried by a boundary edge."""
        if self.dirichlet[edge]:
            return "dirichlet"
        return "robin" if np.any(self.robin[edge] != 0) else "neumann"

    def dirichlet_dofs(self, mesh: Mesh2D) -> Tuple[np.ndarray, np.ndarray]:
        """
        Constrained degrees of freedom and their values.

        Returns:
            (dof indices, values); vector dofs are 2 * vertex + component
        """
        vertices = np.unique(mesh.boundary_edges[self.dirichlet])
        nodal = _vertex_values(mesh, self.dirichlet_value, self.vector)
        if not self.vector:
            return vertices, nodal[vertices]
        dofs, values = [], []
        for c in (0, 1):
            if self.components[c]:
                dofs.append(2 * vertices + c)
                values.append(nodal[vertices, c])
        for vertex, c in self.pinned:
            dofs.append(np.array([2 * vertex + c]))
            values.append(np.zeros(1))
        if not dofs:
            return np.zeros(0, dtype=np.int64), np.zeros(0)
        dofs = np.concatenate(dofs)
        values = np.concatenate(values)
        dofs, first = np.unique(dofs, return_index=True)
        return dofs, values[first]

    def homogeneous(self) -> "BcSpec":
        """Same operator, zero data: the boundary conditions of an adjoint problem."""
        return replace(self, flux=np.zeros_like(self.flux), interval_flux=(), dirichlet_value=0.0)


# ==================== OBJECTIVES ====================

def _abs2(values: np.ndarray, vector: bool) -> np.ndarray:
    """|values|^2, summed over the trailing component axis when vector."""
    squared = np.abs(values) ** 2
    return squared.sum(axis=-1) if vector else squared


@dataclass(frozen=True)
class Objective:
    """
    Integrand of J(u) = int_Omega j.

    integrand(values, vector) receives nodal-interpolated values (m, q) for
    scalar fields and (m, q, 2) for vector fields; j_of_grad integrands
    receive gradients (m, 2) with vector=True. derivative returns j'(.)
    with the shape of its argument; for complex u it is
    dj/d(Re u) + i dj/d(Im u).
    """
    kind: str
    integrand: Callable[[np.ndarray, bool], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    coefficients: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        validate_choice(self.kind, "objective.kind", OBJECTIVE_KINDS)

    @classmethod
    def u2(cls, weight: float = 1.0) -> "Objective":
        """j(u) = weight |u|^2 (real, complex or vector u)."""
        return cls(OBJECTIVE_J_OF_U, lambda u, vector: weight * _abs2(u, vector), lambda u: 2.0 * weight * u,
                   "u2", {"weight": weight})

    @classmethod
    def abs2(cls) -> "Objective":
        """j(u) = |u|^2 for complex fields, with j'(u) = 2u."""
        return cls(OBJECTIVE_J_OF_U, _abs2, lambda u: 2.0 * u, "abs2")

    @classmethod
    def linear(cls, weight: float = 1.0) -> "Objective":
        """j(u) = weight u; vector fields use the sum of their components."""
        return cls(OBJECTIVE_J_OF_U, lambda u, vector: weight * (u.sum(axis=-1) if vector else u),
                   lambda u: np.full_like(u, weight), "linear", {"weight": weight})

    @classmethod
    def neg_energy(cls, gamma: float = 1.0) -> "Objective":
        """j(V) = -gamma |V|^2 evaluated on the gradient."""
        return cls(OBJECTIVE_J_OF_GRAD, lambda grad, vector: -gamma * _abs2(grad, True),
                   lambda grad: -2.0 * gamma * grad, "neg_energy", {"gamma": gamma})

    @classmethod
    def mean_square(cls) -> "Objective":
        """|u|^2 / (2 Vol(Omega)); the volume is applied at evaluation."""
        return cls(OBJECTIVE_MEAN_SQUARE, lambda u, vector: 0.5 * _abs2(u, vector), lambda u: u, "mean_square")

    @classmethod
    def named(cls, name: str, **coefficients) -> "Objective":
        """Build a preset objective from its config name."""
        presets = {"u2": cls.u2, "abs2": cls.abs2, "linear": cls.linear,
                   "neg_energy": cls.neg_energy, "mean_square": cls.mean_square}
        validate_choice(name, "objective.name", list(presets))
        return presets[name](**coefficients)
