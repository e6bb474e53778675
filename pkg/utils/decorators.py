"""
Decorators for solvers and handlers.
Provides reusable timing, finiteness checks and error context.
"""
import logging
import time
from functools import wraps
from typing import Callable
import numpy as np
from utils.errors import BcOptError, NumericError
from utils.formatters import format_duration


def timed(func: Callable) -> Callable:
    """
    Log the wall time of a call at DEBUG level on the callee's logger.

    Usage:
        @timed
        def assemble_screen(mesh, kernel, eta):
            ...
    """
    logger = logging.getLogger(func.__module__)

    @wraps(func)
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        try:
            return func(*args, **kwargs)
        finally:
            logger.debug(f"{func.__name__} took {format_duration(time.perf_counter() - start)}")

    return wrapper


def finite_result(func: Callable) -> Callable:
    """
    Reject non-finite numerical results.

    Works on functions returning an ndarray or an object with a `values` array.

    Raises:
        NumericError: If the result contains NaN or infinity
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        result = func(*args, **kwargs)
        values = getattr(result, "values", result)
        if isinstance(values, np.ndarray) and not np.all(np.isfinite(values)):
            raise NumericError(f"{func.__name__} produced non-finite values")
        return result

    return wrapper


def with_context(context: str) -> Callable:
    """
    Prefix toolkit errors raised inside the call with a context string.

    Args:
        context: Text prepended to the error message, e.g. "state solve"
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except BcOptError as e:
                message = f"{context}: {e}"
                e.args = (message,)
                if hasattr(e, "message"):
                    e.message = message
                raise
        return wrapper

    return decorator
