"""
Backtracking line search on the penalized objective.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional
from utils.constants import BACKTRACK_FACTOR, LINE_SEARCH_SLACK, MAX_BACKTRACKS
from utils.errors import NumericError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LineSearchResult:
    accepted: bool
    tau: float
    value: float
    trials: int


def line_search(evaluate: Callable[[float], float], tau0: float, factor: float = BACKTRACK_FACTOR,
                max_backtracks: int = MAX_BACKTRACKS, j0: Optional[float] = None) -> LineSearchResult:
    """
    Largest tau in {tau0 * factor^k, k <= max_backtracks} with a strict decrease.

    A step is accepted when evaluate(tau) < evaluate(0) - 1e-12 |evaluate(0)|.

    Args:
        evaluate: penalized objective as a function of the step
        tau0: first trial step
        j0: evaluate(0) when already known

    Returns:
        LineSearchResult; on rejection tau is the last trial and value j0

    Raises:
        NumericError: If evaluate(0) is not finite
    """
    if j0 is None:
        j0 = evaluate(0.0)
    if not math.isfinite(j0):
        raise NumericError(f"Line search started from a non-finite objective {j0}")
    threshold = j0 - LINE_SEARCH_SLACK * abs(j0)

    tau = float(tau0)
    for k in range(max_backtracks + 1):
        value = evaluate(tau)
        if math.isfinite(value) and value < threshold:
            logger.debug(f"Line search accepted tau={tau:.3e} after {k + 1} trials ({j0:.6e} -> {value:.6e})")
            return LineSearchResult(True, tau, float(value), k + 1)
        if k < max_backtracks:
            tau *= factor

    logger.debug(f"Line search rejected {max_backtracks + 1} trials down to tau={tau:.3e}")
    return LineSearchResult(False, tau, float(j0), max_backtracks + 1)
