"""
Parameter studies of the screen solver over mesh sizes and regularization weights.
"""
import logging
from concurrent.futures import Executor
from typing import Callable, List, Optional, Sequence, Tuple
from bem.kernels import laplace3d
from bem.metrics import ScreenMetrics, error_metrics
from bem.polarization import PolarizationTensor, polarization_tensor
from bem.screen import assemble_screen, solve_screen
from mesh2d.generators import gen_screen_disk, n_rings_for_h
from utils.constants import DEFAULT_QUADRATURE_ORDER
from utils.errors import SolverError

logger = logging.getLogger(__name__)


def _equilibrium_column(h: float, etas: Sequence[float], q: int) -> List[ScreenMetrics]:
    mesh = gen_screen_disk(n_rings_for_h(h))
    base = assemble_screen(mesh, laplace3d(), etas[0], q)
    rows = []
    for eta in etas:
        system = base.with_eta(eta)
        try:
            rows.append(error_metrics(solve_screen(system, 1.0), q))
        except SolverError as e:
            logger.warning(f"Sweep point h={h}, eta={eta} skipped: {e}")
    return rows


def equilibrium_sweep(h_values: Sequence[float], eta_values: Sequence[float], q: int = DEFAULT_QUADRATURE_ORDER,
                      executor: Optional[Executor] = None) -> List[ScreenMetrics]:
    """
    (R, A, E) over an (h, eta) grid; one assembly per mesh size.

    Rows are sorted by (h, eta) whatever order the workers finish in.
    """
    hs = sorted(set(float(h) for h in h_values))
    etas = sorted(set(float(e) for e in eta_values))
    logger.info(f"Equilibrium sweep over {len(hs)} mesh sizes x {len(etas)} weights")
    if executor is None:
        columns = [_equilibrium_column(h, etas, q) for h in hs]
    else:
        columns = list(executor.map(lambda h: _equilibrium_column(h, etas, q), hs))
    rows = [row for column in columns for row in column]
    return sorted(rows, key=lambda row: (row.h, row.eta))


def default_eta(h: float) -> float:
    """Weight on the edge of the stable region, (h / 10)^2."""
    return (h / 10.0) ** 2


def polarization_study(h_values: Sequence[float], mu: float, nu: float,
                       eta_rule: Callable[[float], float] = default_eta, q: int = DEFAULT_QUADRATURE_ORDER,
                       executor: Optional[Executor] = None) -> Tuple[List[PolarizationTensor], List[float]]:
    """
    Polarization tensors under joint (h, eta) refinement.

    Returns:
        tensors from coarse to fine, relative changes between successive tensors
    """
    hs = sorted(set(float(h) for h in h_values), reverse=True)

    def one(h: float) -> PolarizationTensor:
        mesh = gen_screen_disk(n_rings_for_h(h))
        return polarization_tensor(mesh, mu, nu, eta_rule(mesh.h), q)

    tensors = list(executor.map(one, hs)) if executor is not None else [one(h) for h in hs]
    changes = [fine.relative_change(coarse) for coarse, fine in zip(tensors, tensors[1:])]
    for tensor, change in zip(tensors[1:], changes):
        logger.info(f"Polarization h={tensor.h:.4g}: relative change {change:.3e}")
    return tensors, changes
