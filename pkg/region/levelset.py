"""
Level-set representation of a region G on a boundary loop.

phi is negative on G and positive outside; after redistancing it is the
signed arclength distance to the interface points, measured around the
closed loop.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple
import numpy as np
from mesh2d.mesh import Mesh2D
from utils.constants import ZERO_PHI
from utils.errors import ConsistencyError, TopologyError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BoundaryLevelSet:
    """
    Per-vertex level-set values on one boundary loop.

    s and points are copied from the mesh so that transport and insertion
    work without it; entry i belongs to the i-th vertex of the loop.
    """
    phi: np.ndarray
    s: np.ndarray
    points: np.ndarray
    loop_ref: int
    perimeter: float

    @classmethod
    def on_mesh(cls, mesh: Mesh2D, phi: np.ndarray, loop: int = 0) -> "BoundaryLevelSet":
        phi = np.asarray(phi, dtype=float)
        vertices = mesh.loop_vertices(loop)
        if phi.shape != vertices.shape:
            raise ConsistencyError(f"Level set has {phi.size} values, loop {loop} has {vertices.size} vertices")
        return cls(phi.copy(), mesh.loop_arclength(loop).copy(), mesh.vertices[vertices].copy(),
                   loop, mesh.loop_perimeter(loop))

    def with_phi(self, phi: np.ndarray) -> "BoundaryLevelSet":
        return BoundaryLevelSet(np.asarray(phi, dtype=float), self.s, self.points, self.loop_ref, self.perimeter)

    @property
    def size(self) -> int:
        return len(self.phi)

    @property
    def segment_lengths(self) -> np.ndarray:
        """Arclength from vertex i to vertex i+1 (wrapping)."""
        return np.diff(np.append(self.s, self.perimeter))

    def check_mesh(self, mesh: Mesh2D) -> None:
        if len(mesh.loop_vertices(self.loop_ref)) != self.size:
            raise ConsistencyError("Level set does not live on this mesh's boundary loop")


@dataclass(frozen=True)
class InterfacePoint:
    """A point of the region boundary; conormal_sign is +1 when G lies behind it in the s direction."""
    s: float
    position: Tuple[float, float]
    conormal_sign: int


def circular_distance(a, b, perimeter: float) -> np.ndarray:
    """Arclength distance on a closed loop: min(|a - b|, perimeter - |a - b|)."""
    delta = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % perimeter
    return np.minimum(delta, perimeter - delta)


def _check_interface(interface: Sequence[InterfacePoint]) -> None:
    if len(interface) % 2:
        raise TopologyError(f"Odd number of interface points ({len(interface)})")
    s = [p.s for p in interface]
    if any(b < a for a, b in zip(s, s[1:])):
        raise TopologyError("Interface points must be sorted by arclength")
    signs = [p.conormal_sign for p in interface]
    if any(sign not in (-1, 1) for sign in signs):
        raise TopologyError("conormal_sign must be +1 or -1")
    if any(a == b for a, b in zip(signs, signs[1:] + signs[:1])):
        raise TopologyError("Interface conormal signs must alternate around the loop")


def signed_distance(s: np.ndarray, perimeter: float, interface: Sequence[InterfacePoint],
                    empty_sign: float = 1.0) -> np.ndarray:
    """Signed distance at arclengths s; the sign follows the interface point preceding each s."""
    s = np.asarray(s, dtype=float)
    if not interface:
        return np.full(len(s), empty_sign * 0.5 * perimeter)
    s_k = np.array([p.s for p in interface])
    signs = np.array([p.conormal_sign for p in interface], dtype=float)
    distance = circular_distance(s[:, None], s_k[None, :], perimeter).min(axis=1)
    previous = np.searchsorted(s_k, s, side="right") - 1
    return signs[previous] * distance


def distance_to_region(mesh: Mesh2D, interface: Sequence[InterfacePoint], loop: int = 0,
                       empty_inside: bool = False) -> BoundaryLevelSet:
    """
    Signed circular-arclength distance to the interface points.

    Args:
        mesh: mesh whose loop carries the level set
        interface: sorted points with alternating conormal signs
        loop: boundary loop index
        empty_inside: with no interface, G is the whole loop instead of empty

    Returns:
        BoundaryLevelSet, negative inside G

    Raises:
        TopologyError: For an odd count, unsorted points or non-alternating signs
    """
    _check_interface(interface)
    s = mesh.loop_arclength(loop)
    perimeter = mesh.loop_perimeter(loop)
    phi = signed_distance(s, perimeter, interface, -1.0 if empty_inside else 1.0)
    return BoundaryLevelSet.on_mesh(mesh, phi, loop)


def _crossings(ls: BoundaryLevelSet) -> List[InterfacePoint]:
    phi = np.where(np.abs(ls.phi) < ZERO_PHI, 0.0, ls.phi)
    n = ls.size
    points = []
    for i in range(n):
        j = (i + 1) % n
        below_i, below_j = phi[i] < 0, phi[j] < 0
        if below_i == below_j:
            continue
        t = phi[i] / (phi[i] - phi[j])
        s_j = ls.s[j] if j > 0 else ls.perimeter
        s = (ls.s[i] + t * (s_j - ls.s[i])) % ls.perimeter
        position = ls.points[i] + t * (ls.points[j] - ls.points[i])
        points.append(InterfacePoint(float(s), (float(position[0]), float(position[1])),
                                     1 if below_i else -1))
    points.sort(key=lambda p: p.s)

    # drop pairs that coincide (a vertex touching zero from one side)
    tolerance = ZERO_PHI * ls.perimeter
    changed = True
    while changed and len(points) >= 2:
        changed = False
        for k in range(len(points)):
            nxt = (k + 1) % len(points)
            if circular_distance(points[k].s, points[nxt].s, ls.perimeter) <= tolerance \
                    and points[k].conormal_sign != points[nxt].conormal_sign:
                points = [p for idx, p in enumerate(points) if idx not in (k, nxt)]
                changed = True
                break
    return points


def extract_interface(ls: BoundaryLevelSet, mesh: Mesh2D = None) -> List[InterfacePoint]:
    """
    Zero crossings of the piecewise-linear level set.

    Vertices with |phi| < 1e-13 count as lying on the interface; crossings
    that would bound a zero-length segment are removed.

    Returns:
        Sorted list of InterfacePoint (empty when phi has constant sign)
    """
    if mesh is not None:
        ls.check_mesh(mesh)
    return _crossings(ls)


def redistance(ls: BoundaryLevelSet, mesh: Mesh2D = None) -> BoundaryLevelSet:
    """Replace phi by the signed distance to its own zero set."""
    interface = extract_interface(ls, mesh)
    empty_sign = -1.0 if (not interface and np.all(ls.phi < 0)) else 1.0
    return ls.with_phi(signed_distance(ls.s, ls.perimeter, interface, empty_sign))


def area(ls: BoundaryLevelSet, mesh: Mesh2D = None) -> float:
    """Arclength of G = {phi < 0}, with linear interpolation at crossings."""
    if mesh is not None:
        ls.check_mesh(mesh)
    phi = np.where(np.abs(ls.phi) < ZERO_PHI, 0.0, ls.phi)
    nxt = np.roll(phi, -1)
    lengths = ls.segment_lengths
    both = (phi < 0) & (nxt < 0)
    enter = (phi >= 0) & (nxt < 0)
    leave = (phi < 0) & (nxt >= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(phi != nxt, phi / (phi - nxt), 0.0)
    total = lengths[both].sum() + (t[leave] * lengths[leave]).sum() + ((1 - t[enter]) * lengths[enter]).sum()
    return float(total)


def cont(ls: BoundaryLevelSet, mesh: Mesh2D = None) -> int:
    """Number of interface points of G."""
    return len(extract_interface(ls, mesh))


def arcs_to_levelset(mesh: Mesh2D, arcs: Sequence[Tuple[float, float]], loop: int = 0) -> BoundaryLevelSet:
    """
    Level set of the union of arcs [s_start, s_end] (wrapping allowed).

    Raises:
        TopologyError: If arcs overlap or have zero length
    """
    perimeter = mesh.loop_perimeter(loop)
    points = []
    for start, end in arcs:
        start, end = float(start) % perimeter, float(end) % perimeter
        if start == end:
            raise TopologyError(f"Arc ({start}, {end}) has zero length")
        for s, sign in ((start, -1), (end, 1)):
            position = mesh.point_on_loop(s, loop)[2]
            points.append(InterfacePoint(s, (float(position[0]), float(position[1])), sign))
    points.sort(key=lambda p: p.s)
    return distance_to_region(mesh, points, loop)


def transfer(ls: BoundaryLevelSet, mesh: Mesh2D) -> BoundaryLevelSet:
    """Interpolate a level set onto the same loop of another mesh (periodic in s)."""
    s_from = np.append(ls.s, ls.perimeter)
    phi_from = np.append(ls.phi, ls.phi[0])
    s_to = mesh.loop_arclength(ls.loop_ref)
    return BoundaryLevelSet.on_mesh(mesh, np.interp(s_to, s_from, phi_from), ls.loop_ref)


def empty_region(mesh: Mesh2D, loop: int = 0) -> BoundaryLevelSet:
    """The G = empty convention: phi = perimeter / 2 everywhere."""
    return distance_to_region(mesh, [], loop)
