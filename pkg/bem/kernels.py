"""
Fundamental solutions used by the screen solver and the topological formulas.
Kernels depend on x - y only and are evaluated vectorized on arrays of differences.
"""
import logging
import math
from dataclasses import dataclass
import numpy as np
from utils.constants import (
    KERNEL_KELVIN2D, KERNEL_KELVIN3D, KERNEL_LAPLACE2D_LOG, KERNEL_LAPLACE3D, KERNEL_MINDLIN2D, KERNEL_MINDLIN3D
)
from utils.errors import SingularityError, ValidationError
from utils.validators import validate_poisson_ratio, validate_positive

logger = logging.getLogger(__name__)

# in-plane tolerance for the Mindlin surface formulas
PLANE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Kernel:
    """
    A scalar or matrix-valued kernel k(x, y) = k(x - y).

    lam is used by the Kelvin kernels, nu by the Mindlin kernels.
    """
    kind: str
    mu: float = 1.0
    lam: float = 0.0
    nu: float = 0.0

    @property
    def arity(self) -> int:
        if self.kind in (KERNEL_LAPLACE3D, KERNEL_LAPLACE2D_LOG):
            return 1
        return 3 if self.kind in (KERNEL_KELVIN3D, KERNEL_MINDLIN3D) else 2

    @property
    def dim(self) -> int:
        return 3 if self.kind in (KERNEL_LAPLACE3D, KERNEL_KELVIN3D, KERNEL_MINDLIN3D) else 2

    @property
    def homogeneous(self) -> bool:
        """True for kernels homogeneous of degree -1 (all 3D kernels)."""
        return self.dim == 3

    @property
    def nu_bar(self) -> float:
        return self.nu / (1.0 + self.nu)

    @property
    def kelvin_constants(self):
        alpha = 0.5 * (1.0 / self.mu + 1.0 / (2.0 * self.mu + self.lam))
        beta = 0.5 * (1.0 / self.mu - 1.0 / (2.0 * self.mu + self.lam))
        return alpha, beta

    def values(self, d: np.ndarray) -> np.ndarray:
        """
        Kernel at differences d = x - y of shape (..., k).

        Points given with two coordinates lie in the plane x3 = 0 for 3D kernels.

        Returns:
            (...) for scalar kernels, (..., a, a) for matrix kernels
        """
        d = np.asarray(d, dtype=float)
        if self.dim == 3 and d.shape[-1] == 2:
            d = np.concatenate([d, np.zeros(d.shape[:-1] + (1,))], axis=-1)
        r = np.linalg.norm(d, axis=-1)
        return _EVALUATORS[self.kind](self, d, r)

    def direction_values(self, omega: np.ndarray) -> np.ndarray:
        """Values at unit directions; k(d) = direction_values(d / |d|) / |d| for homogeneous kernels."""
        if not self.homogeneous:
            raise ValidationError(f"Kernel '{self.kind}' is not homogeneous of degree -1", "kernel")
        return self.values(omega)


# ==================== EVALUATORS ====================

def _laplace3d(kernel: Kernel, d: np.ndarray, r: np.ndarray) -> np.ndarray:
    return 1.0 / (4.0 * math.pi * r)


def _laplace2d_log(kernel: Kernel, d: np.ndarray, r: np.ndarray) -> np.ndarray:
    return -np.log(r) / (2.0 * math.pi)


def _outer(d: np.ndarray) -> np.ndarray:
    return d[..., :, None] * d[..., None, :]


def _kelvin3d(kernel: Kernel, d: np.ndarray, r: np.ndarray) -> np.ndarray:
    alpha, beta = kernel.kelvin_constants
    eye = np.eye(3)
    return (alpha / (4.0 * math.pi)) * eye / r[..., None, None] \
        + (beta / (4.0 * math.pi)) * _outer(d) / (r ** 3)[..., None, None]


def _kelvin2d(kernel: Kernel, d: np.ndarray, r: np.ndarray) -> np.ndarray:
    alpha, beta = kernel.kelvin_constants
    eye = np.eye(2)
    return -(alpha / (2.0 * math.pi)) * eye * np.log(r)[..., None, None] \
        + (beta / (2.0 * math.pi)) * _outer(d) / (r ** 2)[..., None, None]


def _mindlin3d(kernel: Kernel, d: np.ndarray, r: np.ndarray) -> np.ndarray:
    if np.any(np.abs(d[..., 2]) > PLANE_TOLERANCE * np.maximum(r, 1.0)):
        raise ValidationError("Mindlin kernel is only available for points on the boundary plane", "points")
    mu, nu = kernel.mu, kernel.nu
    out = np.zeros(d.shape[:-1] + (3, 3))
    planar = d[..., :2]
    out[..., :2, :2] = ((1.0 - nu) / (2.0 * math.pi * mu)) * np.eye(2) / r[..., None, None] \
        + (nu / (2.0 * math.pi * mu)) * _outer(planar) / (r ** 3)[..., None, None]
    tilt = ((1.0 - 2.0 * nu) / (4.0 * math.pi * mu)) * planar / (r ** 2)[..., None]
    out[..., 2, :2] = -tilt
    # reciprocity L(x, y) = L(y, x)^T
    out[..., :2, 2] = tilt
    out[..., 2, 2] = (1.0 - nu) / (2.0 * math.pi * mu * r)
    return out


def _mindlin2d(kernel: Kernel, d: np.ndarray, r: np.ndarray) -> np.ndarray:
    mu, nb = kernel.mu, kernel.nu_bar
    theta = np.where(d[..., 0] > 0, 0.5 * math.pi, -0.5 * math.pi)
    log_part = -(1.0 - nb) / (math.pi * mu) * np.log(r)
    out = np.zeros(d.shape[:-1] + (2, 2))
    out[..., 0, 0] = log_part + (3.0 - 4.0 * nb) / (8.0 * math.pi * mu * (1.0 - nb))
    out[..., 0, 1] = -(1.0 - 2.0 * nb) * theta / (2.0 * math.pi * mu)
    out[..., 1, 0] = -out[..., 0, 1]
    out[..., 1, 1] = log_part
    return out


_EVALUATORS = {
    KERNEL_LAPLACE3D: _laplace3d,
    KERNEL_LAPLACE2D_LOG: _laplace2d_log,
    KERNEL_KELVIN3D: _kelvin3d,
    KERNEL_KELVIN2D: _kelvin2d,
    KERNEL_MINDLIN3D: _mindlin3d,
    KERNEL_MINDLIN2D: _mindlin2d,
}


# ==================== CONSTRUCTORS ====================

def laplace3d() -> Kernel:
    return Kernel(KERNEL_LAPLACE3D)


def laplace2d_log() -> Kernel:
    return Kernel(KERNEL_LAPLACE2D_LOG)


def kelvin3d(mu: float, lam: float) -> Kernel:
    return Kernel(KERNEL_KELVIN3D, mu=validate_positive(mu, "mu"), lam=float(lam))


def kelvin2d(mu: float, lam: float) -> Kernel:
    return Kernel(KERNEL_KELVIN2D, mu=validate_positive(mu, "mu"), lam=float(lam))


def mindlin3d(mu: float, nu: float) -> Kernel:
    return Kernel(KERNEL_MINDLIN3D, mu=validate_positive(mu, "mu"), nu=validate_poisson_ratio(nu))


def mindlin2d(mu: float, nu: float) -> Kernel:
    """2D half-plane kernel; nu is the Poisson ratio, the formulas use nu / (1 + nu)."""
    return Kernel(KERNEL_MINDLIN2D, mu=validate_positive(mu, "mu"), nu=validate_poisson_ratio(nu))


def kernel_by_name(kind: str, mu: float = 1.0, lam: float = 0.0, nu: float = 0.3) -> Kernel:
    """
    Build a kernel from its name.

    Raises:
        ValidationError: For an unknown kind
    """
    builders = {
        KERNEL_LAPLACE3D: lambda: laplace3d(),
        KERNEL_LAPLACE2D_LOG: lambda: laplace2d_log(),
        KERNEL_KELVIN3D: lambda: kelvin3d(mu, lam),
        KERNEL_KELVIN2D: lambda: kelvin2d(mu, lam),
        KERNEL_MINDLIN3D: lambda: mindlin3d(mu, nu),
        KERNEL_MINDLIN2D: lambda: mindlin2d(mu, nu),
    }
    if kind not in builders:
        raise ValidationError(f"Unknown kernel '{kind}'", "kernel")
    return builders[kind]()


def kernel_eval(kernel: Kernel, x, y) -> np.ndarray:
    """
    Closed-form kernel value at a pair of points.

    Raises:
        SingularityError: If x and y coincide
    """
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    if np.linalg.norm(d) == 0.0:
        raise SingularityError(f"Kernel '{kernel.kind}' evaluated at coincident points")
    value = kernel.values(d)
    return float(value) if kernel.arity == 1 else value


# ==================== HALF-SPACE CHECKS ====================

def half_space_surface_displacement(mu: float, nu: float, load: np.ndarray, x, y) -> np.ndarray:
    """
    Surface displacement at y of the lower half-space under a point load at x.

    Closed forms of the normal (tensile load along +e3) and tangential point
    loads, written in polar components about the load point: the normal
    load lifts the surface by (1 - nu) P / (2 pi mu r) and pushes it
    radially outward by (1 - 2 nu) P / (4 pi mu r); a tangential load Q
    drags the surface by [(1 - nu) Q + nu (Q . e) e] / (2 pi mu r) and
    sinks the points ahead of it by (1 - 2 nu) (Q . e) / (4 pi mu r).

    Returns:
        displacement 3-vector u(y), which equals L(x, y)^T load for the Mindlin kernel
    """
    load = np.asarray(load, dtype=float)
    offset = np.asarray(y, dtype=float)[:2] - np.asarray(x, dtype=float)[:2]
    r = float(np.linalg.norm(offset))
    if r == 0.0:
        raise SingularityError("Surface displacement evaluated at the load point")
    e = offset / r
    normal, tangential = load[2], load[:2]
    along = float(tangential @ e)
    u = np.zeros(3)
    u[:2] = ((1.0 - nu) * tangential + nu * along * e) / (2.0 * math.pi * mu * r)
    u[:2] += (1.0 - 2.0 * nu) * normal * e / (4.0 * math.pi * mu * r)
    u[2] = (1.0 - nu) * normal / (2.0 * math.pi * mu * r) - (1.0 - 2.0 * nu) * along / (4.0 * math.pi * mu * r)
    return u
