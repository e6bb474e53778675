"""
Elastic polarization tensor of the unit disk on the half-space boundary.
"""
import logging
from dataclasses import dataclass
from typing import Optional
import numpy as np
from bem.kernels import mindlin3d
from bem.screen import ScreenSystem, assemble_screen, solve_screen
from mesh2d.mesh import DiskSurfaceMesh
from utils.constants import DEFAULT_QUADRATURE_ORDER
from utils.decorators import timed
from utils.errors import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolarizationTensor:
    """M_ij = int (T_L^{-1} e_j) . e_i ds, with the parameters it was computed with."""
    M: np.ndarray
    h: float
    eta: float
    mu: float
    nu: float
    order: int = DEFAULT_QUADRATURE_ORDER

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.M))

    @property
    def symmetry_defect(self) -> float:
        return float(np.abs(self.M - self.M.T).max() / self.norm)

    @property
    def coupling_defect(self) -> float:
        """Largest off-diagonal entry relative to |M|."""
        off = self.M - np.diag(np.diag(self.M))
        return float(np.abs(off).max() / self.norm)

    @property
    def isotropy_defect(self) -> float:
        """|M11 - M22| relative to |M|."""
        return float(abs(self.M[0, 0] - self.M[1, 1]) / self.norm)

    def relative_change(self, other: "PolarizationTensor") -> float:
        return float(np.linalg.norm(self.M - other.M) / other.norm)

    def to_dict(self) -> dict:
        return {
            "M": self.M.tolist(),
            "provenance": {"h": self.h, "eta": self.eta, "mu": self.mu, "nu": self.nu, "q": self.order},
        }


@timed
def polarization_tensor(mesh: DiskSurfaceMesh, mu: float, nu: float, eta: float,
                        q: int = DEFAULT_QUADRATURE_ORDER, system: Optional[ScreenSystem] = None,
                        workers: int = 1, executor=None) -> PolarizationTensor:
    """
    Solve the Mindlin screen problem for the right-hand sides e_1, e_2, e_3.

    Args:
        mesh: triangulated unit disk
        mu, nu: shear modulus and Poisson ratio in (0, 0.5)
        eta: regularization weight
        system: an already assembled mindlin3d system to reuse

    Raises:
        ValidationError: For invalid material parameters
        SolverError: If the screen system cannot be factorized
    """
    if system is None:
        system = assemble_screen(mesh, mindlin3d(mu, nu), eta, q, executor, workers)
    elif system.kernel.kind != mindlin3d(mu, nu).kind:
        raise ValidationError("Polarization tensor needs a mindlin3d system", "system")

    M = np.zeros((3, 3))
    for j in range(3):
        density = solve_screen(system, np.eye(3)[j])
        M[:, j] = density.integral()
    tensor = PolarizationTensor(M, mesh.h, system.eta, float(mu), float(nu), system.order)
    if np.any(np.diag(M) <= 0):
        logger.warning(f"Polarization tensor has a non-positive diagonal: {np.diag(M)}")
    logger.info(f"Polarization tensor (h={mesh.h:.4g}, eta={system.eta:.3e}): diag={np.diag(M)}, "
                f"symmetry defect {tensor.symmetry_defect:.2e}")
    return tensor
