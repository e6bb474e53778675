"""
Topological derivatives: the coefficient d_T of J(G + disk) = J(G) + rho(eps) d_T + o(rho(eps)).
Fields are evaluated at the admissible vertices of a body-fitted boundary loop.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence, Tuple
import numpy as np
from fem.assembly import evaluate_source
from fem.fields import FemField
from mesh2d.mesh import Mesh2D
from region.evolution import admissible_vertices
from region.levelset import BoundaryLevelSet, extract_interface
from utils.constants import POINT_TOLERANCE
from utils.errors import ConsistencyError, ValidationError
from utils.validators import validate_open_unit

logger = logging.getLogger(__name__)

# ==================== SCALE FUNCTIONS ====================

RHO_LOG = "pi/|log eps|"
RHO_INV_LOG = "1/|log eps|"
RHO_2EPS = "2 eps"
RHO_EPS = "eps"
RHO_4EPS = "4 eps"
RHO_PI_EPS2 = "pi eps^2"

# variant -> (2D scale, 3D scale)
RHO_TABLE: Dict[str, Tuple[str, Optional[str]]] = {
    "conduc_dirichlet_hom": (RHO_LOG, RHO_4EPS),
    "conduc_dirichlet_inhom": (RHO_LOG, RHO_4EPS),
    "conduc_neumann_inhom": (RHO_2EPS, RHO_PI_EPS2),
    "helmholtz_impedance": (RHO_2EPS, RHO_PI_EPS2),
    "elast_dirichlet_2d": (RHO_INV_LOG, None),
    "elast_dirichlet_3d": (RHO_EPS, RHO_EPS),
    "clamp_load_2d": (RHO_EPS, None),
    "mixer_cathode": (RHO_LOG, RHO_4EPS),
    "mixer_anode": (RHO_LOG, RHO_4EPS),
}


def rho(variant: str, eps: float, dim: int = 2) -> float:
    """
    Scale function of a variant.

    Raises:
        ValidationError: For an unknown variant, eps outside (0, 1) or a missing 3D form
    """
    if variant not in RHO_TABLE:
        raise ValidationError(f"Unknown topological variant '{variant}'", "variant")
    eps = validate_open_unit(eps, "eps")
    kind = RHO_TABLE[variant][0 if dim == 2 else 1]
    if kind is None:
        raise ValidationError(f"Variant '{variant}' has no {dim}D scale function", "dim")
    return {
        RHO_LOG: math.pi / abs(math.log(eps)),
        RHO_INV_LOG: 1.0 / abs(math.log(eps)),
        RHO_2EPS: 2.0 * eps,
        RHO_EPS: eps,
        RHO_4EPS: 4.0 * eps,
        RHO_PI_EPS2: math.pi * eps ** 2,
    }[kind]


@dataclass(frozen=True)
class TopoField:
    """
    Topological derivative at admissible boundary vertices.

    vertices are mesh vertex ids, s their arclength on the loop.
    """
    values: np.ndarray
    vertices: np.ndarray
    s: np.ndarray
    variant: str
    delta_excl: float
    loop_ref: int = 0

    @property
    def rho_kind(self) -> str:
        return RHO_TABLE[self.variant][0]

    def rho(self, eps: float, dim: int = 2) -> float:
        return rho(self.variant, eps, dim)

    def arclength_of(self, vertex: int) -> float:
        hits = np.flatnonzero(self.vertices == vertex)
        if not len(hits):
            raise ConsistencyError(f"Vertex {vertex} is not in the topological field")
        return float(self.s[hits[0]])

    def predicted(self, vertex: int, eps: float) -> float:
        """First-order change of J when a disk of radius eps is added at vertex."""
        hits = np.flatnonzero(self.vertices == vertex)
        return self.rho(eps) * float(self.values[hits[0]])


# ==================== COEFFICIENTS ====================

def conduc_dirichlet_hom(u0, p0, gamma):
    return gamma * u0 * p0


def conduc_dirichlet_inhom(u0, p0, gamma, u_in):
    # Robin-limit sign: c (u - u_in) p, consistent with the homogeneous case at u_in = 0
    return gamma * (u0 - u_in) * p0


def conduc_neumann_inhom(p0, g):
    return -g * p0


def helmholtz_impedance_coefficient(u0, p0, k, Z=1.0):
    return (k / Z) * np.imag(np.conj(u0) * p0)


def elast_dirichlet_2d(u0, p0, mu, nu):
    nu_bar = nu / (1.0 + nu)
    return math.pi * mu / (1.0 - nu_bar) * np.einsum("...c,...c->...", u0, p0)


def elast_dirichlet_3d(u0, p0, M):
    """(M u0) . p0 for 3-vectors; in-plane 2-vectors are embedded with zero normal component."""
    u0 = _embed3(u0)
    p0 = _embed3(p0)
    return np.einsum("ij,...j,...i->...", np.asarray(M, dtype=float), u0, p0)


def _embed3(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1] == 3:
        return v
    return np.concatenate([v, np.zeros(v.shape[:-1] + (1,))], axis=-1)


def clamp_load_2d(p0, f, normals):
    return -2.0 * f * np.einsum("...c,...c->...", normals, p0)


def mixer_cathode(u0, p0, gamma):
    return gamma * u0 * p0


def mixer_anode(u0, p0, gamma, u_in):
    return gamma * (u0 - u_in) * p0


# ==================== FIELDS ====================

def vertex_normals(mesh: Mesh2D, loop: int = 0) -> np.ndarray:
    """Outward unit normals at loop vertices (mean of the two incident edge normals)."""
    ids = mesh.loop_edge_ids(loop)
    normals = mesh.edge_normals[ids]
    mean = normals + np.roll(normals, 1, axis=0)
    return mean / np.linalg.norm(mean, axis=1)[:, None]


def _require_fitted(ls: BoundaryLevelSet, mesh: Mesh2D) -> None:
    ls.check_mesh(mesh)
    s_vertices = mesh.loop_arclength(ls.loop_ref)
    tolerance = POINT_TOLERANCE * max(1.0, ls.perimeter)
    for point in extract_interface(ls, mesh):
        gap = np.abs(s_vertices - point.s)
        gap = np.minimum(gap, ls.perimeter - gap)
        if gap.min() > tolerance:
            raise ConsistencyError(f"Interface point at s={point.s:.6g} is not a mesh vertex (unfitted mesh)")


def _nodal(field: Optional[FemField], vertices: np.ndarray, mesh: Mesh2D):
    if field is None:
        return None
    if field.mesh is not mesh:
        raise ConsistencyError("Field does not live on the fitted mesh")
    return field.values[vertices]


TOPO_VARIANTS: Dict[str, Callable] = {
    "conduc_dirichlet_hom": conduc_dirichlet_hom,
    "conduc_dirichlet_inhom": conduc_dirichlet_inhom,
    "conduc_neumann_inhom": conduc_neumann_inhom,
    "helmholtz_impedance": helmholtz_impedance_coefficient,
    "elast_dirichlet_2d": elast_dirichlet_2d,
    "elast_dirichlet_3d": elast_dirichlet_3d,
    "clamp_load_2d": clamp_load_2d,
    "mixer_cathode": mixer_cathode,
    "mixer_anode": mixer_anode,
}


def topo_field(variant: str, mesh: Mesh2D, ls: BoundaryLevelSet, u0: FemField = None, p0: FemField = None,
               delta_excl: float = 0.0, others: Sequence[BoundaryLevelSet] = (), gamma: Any = 1.0,
               **coefficients) -> TopoField:
    """
    Topological derivative of a variant at the admissible vertices of ls's loop.

    Args:
        variant: one of TOPO_VARIANTS
        mesh: body-fitted mesh on which u0 and p0 were solved sharply
        ls: current region G (vertices inside or near it are excluded)
        u0, p0: sharp state and adjoint
        delta_excl: exclusion distance to G, other regions and fixed edges
        others: level sets of other regions to keep away from
        gamma: conductivity for the conductivity variants
        coefficients: u_in, g, k, Z, mu, nu, M or f as the variant needs

    Raises:
        ConsistencyError: For unfitted inputs
        ValidationError: For an unknown variant
    """
    if variant not in TOPO_VARIANTS:
        raise ValidationError(f"Unknown topological variant '{variant}'", "variant")
    _require_fitted(ls, mesh)
    loop_vertices = mesh.loop_vertices(ls.loop_ref)
    local = admissible_vertices(ls, mesh, delta_excl, others)
    vertices = loop_vertices[local]
    u = _nodal(u0, vertices, mesh)
    p = _nodal(p0, vertices, mesh)

    if variant == "conduc_neumann_inhom":
        values = conduc_neumann_inhom(p, coefficients["g"])
    elif variant == "helmholtz_impedance":
        values = helmholtz_impedance_coefficient(u, p, coefficients["k"], coefficients.get("Z", 1.0))
    elif variant == "elast_dirichlet_2d":
        values = elast_dirichlet_2d(u, p, coefficients["mu"], coefficients["nu"])
    elif variant == "elast_dirichlet_3d":
        values = elast_dirichlet_3d(u, p, coefficients["M"])
    elif variant == "clamp_load_2d":
        values = clamp_load_2d(p, coefficients["f"], vertex_normals(mesh, ls.loop_ref)[local])
    else:
        gamma_v = evaluate_source(gamma, mesh.vertices[vertices])
        if variant in ("conduc_dirichlet_inhom", "mixer_anode"):
            values = TOPO_VARIANTS[variant](u, p, gamma_v, coefficients.get("u_in", 0.0))
        else:
            values = TOPO_VARIANTS[variant](u, p, gamma_v)

    logger.debug(f"Topological field '{variant}': {len(vertices)} admissible vertices")
    values = np.asarray(values, dtype=float).reshape(-1)
    return TopoField(values, vertices, ls.s[local], variant, float(delta_excl), ls.loop_ref)


def select_insertion_point(tf: TopoField, delta_excl: float = None) -> Optional[Tuple[int, float]]:
    """
    Vertex with the most negative topological derivative.

    Ties are broken by the smallest arclength.

    Returns:
        (mesh vertex, value) or None when no value is negative
    """
    if delta_excl is not None and abs(delta_excl - tf.delta_excl) > 1e-12 * max(1.0, delta_excl):
        raise ConsistencyError(
            f"Field computed with delta_excl={tf.delta_excl}, selection requested with {delta_excl}"
        )
    if not len(tf.values):
        return None
    order = np.lexsort((tf.s, tf.values))
    best = order[0]
    if tf.values[best] >= 0:
        return None
    return int(tf.vertices[best]), float(tf.values[best])
