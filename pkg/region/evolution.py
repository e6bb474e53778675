"""
Transport of boundary level sets: upwind advection, velocity extension,
min-union disk insertion and exclusion of fixed boundary labels.
"""
import logging
import math
from typing import Sequence
import numpy as np
from mesh2d.mesh import Mesh2D
from region.levelset import BoundaryLevelSet, InterfacePoint, circular_distance, redistance
from utils.constants import CFL_NUMBER, EXTENSION_WIDTH_EDGES, LABEL_OPTIMIZABLE
from utils.errors import NumericError, ValidationError
from utils.validators import validate_non_negative

logger = logging.getLogger(__name__)


def advect(ls: BoundaryLevelSet, velocity: np.ndarray, tau: float) -> BoundaryLevelSet:
    """
    Solve d(phi)/dt + v d(phi)/ds = 0 for time tau with first-order upwinding.

    Sub-steps keep max|v| dt <= 0.9 * min segment length; the result is
    redistanced. A zero velocity or tau = 0 returns ls itself.

    Args:
        ls: level set
        velocity: per-vertex speed along increasing s
        tau: time horizon

    Raises:
        ValidationError: If tau < 0
        NumericError: If the velocity is not finite
    """
    tau = validate_non_negative(tau, "tau")
    velocity = np.asarray(velocity, dtype=float)
    if velocity.shape != ls.phi.shape:
        raise ValidationError(f"velocity has shape {velocity.shape}, expected {ls.phi.shape}", "velocity")
    if not np.all(np.isfinite(velocity)):
        raise NumericError("Advection velocity is not finite")

    vmax = float(np.abs(velocity).max()) if velocity.size else 0.0
    if tau == 0.0 or vmax == 0.0:
        return ls

    forward = ls.segment_lengths
    backward = np.roll(forward, 1)
    dt_max = CFL_NUMBER * forward.min() / vmax
    steps = max(1, int(math.ceil(tau / dt_max)))
    dt = tau / steps

    phi = ls.phi.copy()
    positive = velocity > 0
    for _ in range(steps):
        grad_back = (phi - np.roll(phi, 1)) / backward
        grad_fwd = (np.roll(phi, -1) - phi) / forward
        phi = phi - dt * velocity * np.where(positive, grad_back, grad_fwd)

    logger.debug(f"Advected level set over tau={tau:.3e} in {steps} sub-steps")
    return redistance(ls.with_phi(phi))


def extend_velocity(ls: BoundaryLevelSet, interface: Sequence[InterfacePoint],
                    values: Sequence[float], width: float = None) -> np.ndarray:
    """
    Spread interface values to every loop vertex with exponential weights.

    v(s) = sum_k v_k exp(-d_k / w) / sum_k exp(-d_k / w), d_k the circular
    distance to point k; w defaults to 5 mean segment lengths.
    """
    if not interface:
        return np.zeros(ls.size)
    if width is None:
        width = EXTENSION_WIDTH_EDGES * ls.perimeter / ls.size
    s_k = np.array([p.s for p in interface])
    d = circular_distance(ls.s[:, None], s_k[None, :], ls.perimeter)
    weights = np.exp(-(d - d.min(axis=1, keepdims=True)) / width)
    return (weights * np.asarray(values, dtype=float)[None, :]).sum(axis=1) / weights.sum(axis=1)


def descent_velocity(ls: BoundaryLevelSet, interface: Sequence[InterfacePoint],
                     gradient: Sequence[float], width: float = None) -> np.ndarray:
    """
    Advection velocity realising theta . n = -v_G at every interface point.

    The conormal at point k is conormal_sign_k times the s direction, so
    the speed along s is -conormal_sign_k * v_k before extension.
    """
    along_s = [-p.conormal_sign * float(v) for p, v in zip(interface, gradient)]
    return extend_velocity(ls, interface, along_s, width)


def insert_disk(ls: BoundaryLevelSet, x0_s: float, eps: float) -> BoundaryLevelSet:
    """
    Add the arc of half-length eps centred at x0_s to G.

    phi'(v) = min(phi(v), circ_dist(v, x0_s) - eps), then redistanced.

    Raises:
        ValidationError: If eps is not in (0, perimeter / 4)
    """
    eps = float(eps)
    if not 0.0 < eps < 0.25 * ls.perimeter:
        raise ValidationError(f"eps must lie in (0, perimeter/4), got {eps}", "eps")
    disk = circular_distance(ls.s, x0_s, ls.perimeter) - eps
    return redistance(ls.with_phi(np.minimum(ls.phi, disk)))


def mask_fixed(ls: BoundaryLevelSet, mesh: Mesh2D) -> BoundaryLevelSet:
    """
    Keep G on label-0 edges: phi >= 0 on every vertex touching a fixed edge.

    Returns ls unchanged when the loop has no fixed labels or nothing leaks.
    """
    ids = mesh.loop_edge_ids(ls.loop_ref)
    fixed_edge = mesh.edge_labels[ids] != LABEL_OPTIMIZABLE
    if not fixed_edge.any():
        return ls
    touches = fixed_edge | np.roll(fixed_edge, 1)
    if not np.any(ls.phi[touches] < 0):
        return ls
    phi = np.where(touches, np.maximum(ls.phi, 0.0), ls.phi)
    return redistance(ls.with_phi(phi))


def admissible_vertices(ls: BoundaryLevelSet, mesh: Mesh2D, delta_excl: float,
                        others: Sequence[BoundaryLevelSet] = ()) -> np.ndarray:
    """
    Loop vertices where a new arc may be inserted.

    A vertex qualifies when both incident edges are optimizable, it lies
    outside G, and its distance to G, to any other region and to fixed
    edges exceeds delta_excl.
    """
    ids = mesh.loop_edge_ids(ls.loop_ref)
    fixed_edge = mesh.edge_labels[ids] != LABEL_OPTIMIZABLE
    ok = ~(fixed_edge | np.roll(fixed_edge, 1))
    ok &= ls.phi > delta_excl
    for other in others:
        ok &= other.phi > delta_excl
    if fixed_edge.any():
        fixed_vertices = np.flatnonzero(fixed_edge | np.roll(fixed_edge, 1))
        d = circular_distance(ls.s[:, None], ls.s[fixed_vertices][None, :], ls.perimeter).min(axis=1)
        ok &= d > delta_excl
    return np.flatnonzero(ok)
