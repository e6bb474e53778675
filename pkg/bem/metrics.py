"""
Error measures of the equilibrium-distribution problem and residuals of screen solutions.
"""
import logging
import math
from dataclasses import dataclass
from typing import Any
import numpy as np
from bem.quadrature import collapsed_rule, map_to_triangles, reference_basis
from bem.screen import ScreenDensity, nodal_data, single_layer_potential
from fem.assembly import TRI7_POINTS, TRI7_WEIGHTS
from mesh2d.mesh import DiskSurfaceMesh
from utils.constants import (
    DEFAULT_QUADRATURE_ORDER, EQUILIBRIUM_INTEGRAL, ERROR_DISK_RADIUS, KERNEL_LAPLACE3D
)
from utils.errors import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScreenMetrics:
    """
    Squared residual R, squared mean error A and squared interior error E.

    integral and center carry int phi and phi at the disk centre (vertex 0).
    """
    R: float
    A: float
    E: float
    h: float
    eta: float
    integral: float = float("nan")
    center: float = float("nan")

    def as_row(self) -> dict:
        return {"h": self.h, "eta": self.eta, "R": self.R, "A": self.A, "E": self.E,
                "integral": self.integral, "center": self.center}


def equilibrium_density(points: np.ndarray) -> np.ndarray:
    """Equilibrium distribution 4 / (pi sqrt(1 - |x|^2)) of the unit disk; infinite for |x| >= 1."""
    points = np.asarray(points, dtype=float)
    r2 = np.sum(points[..., :2] ** 2, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = 4.0 / (math.pi * np.sqrt(1.0 - r2))
    return np.where(r2 < 1.0, values, np.inf)


def equilibrium_interpolant(mesh: DiskSurfaceMesh) -> np.ndarray:
    """
    Nodal values of the equilibrium distribution on a ring mesh.

    Interior nodes take the exact value. Boundary nodes, where the density
    is infinite, take the value for which a profile linear in r across the
    outer ring carries the exact mass of that ring.
    """
    if mesh.n_rings < 1:
        raise ValidationError("Equilibrium interpolant needs a ring mesh", "mesh")
    values = equilibrium_density(mesh.vertices)
    delta = 1.0 / mesh.n_rings
    r_in = 1.0 - delta
    phi_in = float(equilibrium_density(np.array([r_in, 0.0])))
    exact = (4.0 / math.pi) * math.sqrt(1.0 - r_in ** 2)
    # int_{r_in}^{1} [phi_in + (phi_out - phi_in) s / delta] (r_in + s) ds = exact
    base = r_in * delta + 0.5 * delta ** 2
    slope = 0.5 * r_in * delta + delta ** 2 / 3.0
    phi_out = phi_in + (exact - phi_in * base) / slope
    values[mesh.boundary_vertices] = phi_out
    return values


def residual_metric(density: ScreenDensity, rhs: Any = None, q: int = DEFAULT_QUADRATURE_ORDER) -> float:
    """
    R = int |T phi - f|^2 ds with T re-applied at tensor Gauss points.

    rhs defaults to the data the density was solved with.
    """
    mesh = density.mesh
    data = density.rhs if rhs is None else nodal_data(mesh, rhs, density.kernel.arity)
    ref, w = collapsed_rule(max(2, q - 1))
    corners = mesh.vertices[mesh.triangles]
    points, jac = map_to_triangles(corners, ref)
    weights = (jac[:, None] * w[None, :]).reshape(-1)
    potential = single_layer_potential(density, points.reshape(-1, 2), q)
    basis = reference_basis(ref)
    target = np.einsum("ni,ki...->kn...", basis, data[mesh.triangles]).reshape(potential.shape)
    misfit = (potential - target) ** 2
    if misfit.ndim == 2:
        misfit = misfit.sum(axis=1)
    return float(weights @ misfit)


def mean_metric(density: ScreenDensity) -> float:
    """A = (int phi - 8)^2."""
    return float((density.integral() - EQUILIBRIUM_INTEGRAL) ** 2)


def interior_error(density: ScreenDensity, radius: float = ERROR_DISK_RADIUS) -> float:
    """E = int_{|x| < radius} |phi - phi_exact|^2 with the degree-5 rule."""
    mesh = density.mesh
    corners = mesh.vertices[mesh.triangles]
    points = np.einsum("qk,mkd->mqd", TRI7_POINTS, corners)
    weights = mesh.areas[:, None] * TRI7_WEIGHTS[None, :]
    approx = np.einsum("qk,mk->mq", TRI7_POINTS, density.values[mesh.triangles])
    inside = np.sum(points ** 2, axis=-1) < radius ** 2
    exact = np.where(inside, equilibrium_density(np.where(inside[..., None], points, 0.0)), 0.0)
    return float(np.sum(np.where(inside, weights * (approx - exact) ** 2, 0.0)))


def error_metrics(density: ScreenDensity, q: int = DEFAULT_QUADRATURE_ORDER) -> ScreenMetrics:
    """
    (R, A, E) of an equilibrium-distribution solve.

    Raises:
        ValidationError: For densities of other kernels
    """
    if density.kernel.kind != KERNEL_LAPLACE3D:
        raise ValidationError("Equilibrium metrics need the laplace3d kernel", "kernel")
    metrics = ScreenMetrics(
        R=residual_metric(density, 1.0, q),
        A=mean_metric(density),
        E=interior_error(density),
        h=density.mesh.h,
        eta=density.eta,
        integral=float(density.integral()),
        center=float(density.at_vertex(0)),
    )
    logger.info(f"Screen metrics h={metrics.h:.4g} eta={metrics.eta:.3e}: "
                f"R={metrics.R:.3e} A={metrics.A:.3e} E={metrics.E:.3e}")
    return metrics
