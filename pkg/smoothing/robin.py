"""
Robin coefficient (1/eps) h(d/eps) replacing a sharp Dirichlet region.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional
import numpy as np
from mesh2d.mesh import Mesh2D
from region.levelset import BoundaryLevelSet, InterfacePoint, circular_distance, extract_interface
from smoothing.profile import TransitionProfile, default_profile
from utils.constants import ROBIN_PREFACTOR_SCALED, ROBIN_PREFACTORS
from utils.errors import ConsistencyError
from utils.validators import validate_choice, validate_positive

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RobinCoefficient:
    """
    Per loop-vertex Robin coefficient and its sensitivity to the level set.

    slope holds d(value)/d(phi); zone[v] is the interface point nearest to
    vertex v (-1 without interface), i.e. the only point whose motion
    changes phi at v after redistancing.
    """
    eps: float
    values: np.ndarray
    slope: np.ndarray
    zone: np.ndarray
    interface: List[InterfacePoint]
    loop_ref: int
    prefactor: str = ROBIN_PREFACTOR_SCALED
    capped: bool = False

    @property
    def scale(self) -> float:
        """Factor multiplying h: 1/eps for the scaled convention, 1 otherwise."""
        return 1.0 / self.eps if self.prefactor == ROBIN_PREFACTOR_SCALED else 1.0

    def edge_values(self, mesh: Mesh2D, per_vertex: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Values at the two end points of every boundary edge, shape (b, 2).

        Edges of other loops get zero. per_vertex replaces self.values.
        """
        data = self.values if per_vertex is None else per_vertex
        out = np.zeros((mesh.n_boundary_edges, 2))
        ids = mesh.loop_edge_ids(self.loop_ref)
        if len(ids) != len(data):
            raise ConsistencyError("Robin coefficient does not match the mesh boundary loop")
        out[ids, 0] = data
        out[ids, 1] = np.roll(data, -1)
        return out

    def interface_sensitivity(self, k: int) -> np.ndarray:
        """
        d(value)/d(delta_k) per loop vertex when interface point k moves by
        delta_k along its conormal (out of G).

        Moving point k outwards lowers phi by delta_k on its zone.
        """
        return np.where(self.zone == k, -self.slope, 0.0)


def robin_coefficient(
    ls: BoundaryLevelSet,
    eps: float,
    profile: TransitionProfile = None,
    prefactor: str = ROBIN_PREFACTOR_SCALED,
    cap: Optional[float] = None,
) -> RobinCoefficient:
    """
    Evaluate (1/eps) h(phi/eps) at every loop vertex.

    Args:
        ls: redistanced level set of the Dirichlet region
        eps: smoothing length
        profile: transition profile (default smoothstep complement)
        prefactor: "scaled" for (1/eps) h, "unscaled" for h
        cap: optional upper bound on the coefficient

    Raises:
        ValidationError: If eps <= 0 or the prefactor is unknown
    """
    eps = validate_positive(eps, "eps")
    prefactor = validate_choice(prefactor, "robin_prefactor", ROBIN_PREFACTORS)
    profile = profile or default_profile()
    scale = 1.0 / eps if prefactor == ROBIN_PREFACTOR_SCALED else 1.0

    t = ls.phi / eps
    values = scale * profile(t)
    slope = scale * profile.prime(t) / eps

    capped = False
    if cap is not None and values.max() > cap:
        logger.warning(f"Robin coefficient capped at {cap:.3e} (max {values.max():.3e}, eps={eps:.3e})")
        values = np.minimum(values, cap)
        slope = np.where(values >= cap, 0.0, slope)
        capped = True

    interface = extract_interface(ls)
    if interface:
        s_k = np.array([p.s for p in interface])
        zone = np.argmin(circular_distance(ls.s[:, None], s_k[None, :], ls.perimeter), axis=1)
    else:
        zone = np.full(ls.size, -1)

    return RobinCoefficient(eps, values, slope, zone, interface, ls.loop_ref, prefactor, capped)
