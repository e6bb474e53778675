"""
Shape gradients of boundary-region functionals.

A ShapeGradient holds one value v_k per interface point such that moving
point k by delta along its outward conormal changes J by v_k * delta.
"""
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Sequence, Tuple
import numpy as np
from fem.assembly import edge_mass
from fem.fields import FemField
from fem.objectives import trace_at
from mesh2d.mesh import Mesh2D
from region.levelset import InterfacePoint
from smoothing.robin import RobinCoefficient
from utils.expressions import Polynomial
from utils.errors import ConsistencyError, ValidationError

logger = logging.getLogger(__name__)

EPS_MATCH = 1e-12


@dataclass(frozen=True)
class ShapeGradient:
    """Per-interface-point density of the shape derivative."""
    values: np.ndarray
    interface: Tuple[InterfacePoint, ...]
    variant: str

    def __post_init__(self):
        if len(self.values) != len(self.interface):
            raise ConsistencyError(f"{len(self.values)} gradient values for {len(self.interface)} interface points")
        if not np.all(np.isfinite(self.values)):
            raise ConsistencyError(f"Shape gradient '{self.variant}' is not finite")

    def __add__(self, other: "ShapeGradient") -> "ShapeGradient":
        if len(other.interface) != len(self.interface):
            raise ConsistencyError("Cannot add shape gradients of different interfaces")
        return ShapeGradient(self.values + other.values, self.interface, f"{self.variant}+{other.variant}")

    def descent_direction(self) -> np.ndarray:
        """theta . n at every interface point: -v."""
        return -self.values

    def predicted_change(self) -> float:
        """J'(G)(theta) for theta . n = -v, i.e. -sum v^2."""
        return -float(np.sum(self.values ** 2))


# ==================== HELPERS ====================

def _check_pair(u: FemField, p: FemField) -> None:
    if u.mesh is not p.mesh:
        raise ConsistencyError("State and adjoint live on different meshes")


def _check_eps(u: FemField, robin: RobinCoefficient) -> None:
    if u.eps is not None and abs(u.eps - robin.eps) > EPS_MATCH * robin.eps:
        raise ConsistencyError(f"State solved with eps={u.eps}, gradient requested with eps={robin.eps}")


def _traces(field: FemField, interface: Sequence[InterfacePoint], loop: int) -> np.ndarray:
    return np.array([trace_at(field, point.s, loop) for point in interface])


def _quadratic_form(mesh: Mesh2D, robin: RobinCoefficient, k: int, left: np.ndarray, right: np.ndarray) -> float:
    """int (d c / d delta_k) left . right ds with the Robin assembly rule."""
    matrix = edge_mass(mesh, robin.edge_values(mesh, robin.interface_sensitivity(k)))
    if left.ndim == 2:
        return float(sum(left[:, c] @ (matrix @ right[:, c]) for c in (0, 1)))
    return float(np.real(left @ (matrix @ right)))


# ==================== SMOOTHED DIRICHLET ====================

def dirichlet_smoothed(u: FemField, p: FemField, robin: RobinCoefficient) -> ShapeGradient:
    """
    Collapsed endpoint form for a smoothed homogeneous Dirichlet region.

    v_k = scale * u(x_k) p(x_k), scale = 1/eps for the scaled coefficient.
    """
    _check_pair(u, p)
    _check_eps(u, robin)
    values = robin.scale * _traces(u, robin.interface, robin.loop_ref) * _traces(p, robin.interface, robin.loop_ref)
    return ShapeGradient(np.real(values), tuple(robin.interface), "dirichlet_smoothed")


def dirichlet_smoothed_integral(u: FemField, p: FemField, robin: RobinCoefficient) -> ShapeGradient:
    """
    Exact derivative of the discrete smoothed objective.

    v_k = int (d h_eps / d delta_k) u p ds, nonzero only around point k.
    """
    _check_pair(u, p)
    _check_eps(u, robin)
    values = [_quadratic_form(u.mesh, robin, k, p.values, u.values) for k in range(len(robin.interface))]
    return ShapeGradient(np.array(values, dtype=float), tuple(robin.interface), "dirichlet_smoothed_integral")


def mixer_two_region(u: FemField, p: FemField, u_in: float, cathode: RobinCoefficient,
                     anode: RobinCoefficient) -> Tuple[ShapeGradient, ShapeGradient]:
    """
    Collapsed forms on the cathode (u = 0) and anode (u = u_in) regions.

    Returns:
        (cathode gradient scale * u p, anode gradient -scale * (u_in - u) p)
    """
    _check_pair(u, p)
    _check_eps(u, cathode)
    u_c = _traces(u, cathode.interface, cathode.loop_ref)
    p_c = _traces(p, cathode.interface, cathode.loop_ref)
    u_a = _traces(u, anode.interface, anode.loop_ref)
    p_a = _traces(p, anode.interface, anode.loop_ref)
    return (
        ShapeGradient(cathode.scale * u_c * p_c, tuple(cathode.interface), "mixer_cathode"),
        ShapeGradient(-anode.scale * (u_in - u_a) * p_a, tuple(anode.interface), "mixer_anode"),
    )


def mixer_two_region_integral(u: FemField, p: FemField, u_in: float, cathode: RobinCoefficient,
                              anode: RobinCoefficient) -> Tuple[ShapeGradient, ShapeGradient]:
    """Exact discrete derivatives for both electrodes: int dh_C u p and int dh_A (u - u_in) p."""
    _check_pair(u, p)
    mesh = u.mesh
    shifted = u.values - u_in
    v_c = [_quadratic_form(mesh, cathode, k, p.values, u.values) for k in range(len(cathode.interface))]
    v_a = [_quadratic_form(mesh, anode, k, p.values, shifted) for k in range(len(anode.interface))]
    return (
        ShapeGradient(np.array(v_c, dtype=float), tuple(cathode.interface), "mixer_cathode_integral"),
        ShapeGradient(np.array(v_a, dtype=float), tuple(anode.interface), "mixer_anode_integral"),
    )


def elastic_support(u: FemField, p: FemField, robin: RobinCoefficient) -> ShapeGradient:
    """Collapsed form for a smoothed clamped support: v_k = scale * u(x_k) . p(x_k)."""
    _check_pair(u, p)
    _check_eps(u, robin)
    u_k = _traces(u, robin.interface, robin.loop_ref)
    p_k = _traces(p, robin.interface, robin.loop_ref)
    values = robin.scale * np.einsum("kc,kc->k", u_k, p_k) if len(u_k) else np.zeros(0)
    return ShapeGradient(values, tuple(robin.interface), "elastic_support")


def elastic_support_integral(u: FemField, p: FemField, robin: RobinCoefficient) -> ShapeGradient:
    """Exact discrete derivative: int (d h_eps / d delta_k) u . p ds."""
    _check_pair(u, p)
    _check_eps(u, robin)
    values = [_quadratic_form(u.mesh, robin, k, p.values, u.values) for k in range(len(robin.interface))]
    return ShapeGradient(np.array(values, dtype=float), tuple(robin.interface), "elastic_support_integral")


# ==================== SHARP DATA ON THE REGION ====================

def neumann_inhom(g: Any, p: FemField, interface: Sequence[InterfacePoint], loop: int = 0) -> ShapeGradient:
    """Inhomogeneous Neumann region with flux g: v_k = -g p(x_k)."""
    values = -np.asarray(g, dtype=float) * _traces(p, interface, loop)
    return ShapeGradient(np.asarray(values, dtype=float), tuple(interface), "neumann_inhom")


def _edge_normal_at(mesh: Mesh2D, s: float, loop: int) -> np.ndarray:
    edge, _, _ = mesh.point_on_loop(s, loop)
    return mesh.edge_normals[edge]


def clamp_load(f: float, p: FemField, interface: Sequence[InterfacePoint], loop: int = 0) -> ShapeGradient:
    """Normal load f n on the region: v_k = -f p(x_k) . n(x_k)."""
    p_k = _traces(p, interface, loop)
    normals = np.array([_edge_normal_at(p.mesh, point.s, loop) for point in interface]).reshape(-1, 2)
    values = -float(f) * np.einsum("kc,kc->k", p_k.reshape(-1, 2), normals)
    return ShapeGradient(values, tuple(interface), "clamp_load")


def helmholtz_impedance(u: FemField, p: FemField, k: float, Z: float, interface: Sequence[InterfacePoint],
                        loop: int = 0, u_incident: complex = 0.0) -> ShapeGradient:
    """
    Impedance region Gamma_R: v_k = (k/Z) Im(conj(u_k) p_k).

    u_incident is added to the state trace (zero for the interior model).
    """
    _check_pair(u, p)
    total = _traces(u, interface, loop) + u_incident
    values = (k / Z) * np.imag(np.conj(total) * _traces(p, interface, loop))
    return ShapeGradient(np.asarray(values, dtype=float).reshape(-1), tuple(interface), "helmholtz_impedance")


# ==================== PENALTIES ====================

def area_penalty(ell: float, interface: Sequence[InterfacePoint]) -> ShapeGradient:
    """ell * Area(G): v_k = ell."""
    return ShapeGradient(np.full(len(interface), float(ell)), tuple(interface), "area_penalty")


def contour_penalty_2d(weight: Any, interface: Sequence[InterfacePoint], mesh: Mesh2D = None,
                       loop: int = 0) -> ShapeGradient:
    """
    Weighted count of interface points, sum_k w(x_k).

    Moving x_k along its conormal changes w(x_k) at the rate of the
    tangential derivative of w; a constant weight gives zero.
    """
    if not isinstance(weight, Polynomial) or weight.degree == 0:
        return ShapeGradient(np.zeros(len(interface)), tuple(interface), "contour_penalty")
    if mesh is None:
        raise ValidationError("A mesh is needed for a non-constant contour weight", "mesh")
    dx, dy = weight.partial("x"), weight.partial("y")
    values = []
    for point in interface:
        edge, _, position = mesh.point_on_loop(point.s, loop)
        a, b = mesh.vertices[mesh.boundary_edges[edge]]
        tangent = (b - a) / np.linalg.norm(b - a)
        gradient = np.array([float(dx.at(position)), float(dy.at(position))])
        values.append(point.conormal_sign * float(gradient @ tangent))
    return ShapeGradient(np.array(values), tuple(interface), "contour_penalty")


# ==================== DISPATCH ====================

SHAPE_VARIANTS: Dict[str, Callable] = {
    "dirichlet_smoothed": dirichlet_smoothed,
    "dirichlet_smoothed_integral": dirichlet_smoothed_integral,
    "neumann_inhom": neumann_inhom,
    "mixer_two_region": mixer_two_region,
    "mixer_two_region_integral": mixer_two_region_integral,
    "elastic_support": elastic_support,
    "elastic_support_integral": elastic_support_integral,
    "clamp_load": clamp_load,
    "area_penalty": area_penalty,
    "contour_penalty_2d": contour_penalty_2d,
    "helmholtz_impedance": helmholtz_impedance,
}


def shape_gradient(variant: str, **inputs) -> Any:
    """
    Evaluate a shape-gradient variant by name.

    Raises:
        ValidationError: For an unknown variant
    """
    if variant not in SHAPE_VARIANTS:
        raise ValidationError(f"Unknown shape-gradient variant '{variant}'", "variant")
    return SHAPE_VARIANTS[variant](**inputs)


def combine(parts: List[ShapeGradient]) -> ShapeGradient:
    """Sum of gradients on the same interface."""
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    return total
