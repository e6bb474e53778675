"""
Error handling middleware.
Catches toolkit errors, reports them on stderr and maps them to exit codes.
"""
import logging
import sys
from typing import Any, Awaitable, Callable, Dict
from utils.constants import EXIT_CONFIG, EXIT_SOLVER, EXIT_UNEXPECTED, EXIT_VALIDATION
from utils.errors import (
    AcceptanceError, BcOptError, ConfigError, ConsistencyError, GeometryError, NumericError, SingularityError,
    SolvabilityError, SolverError, TopologyError, ValidationError
)

logger = logging.getLogger(__name__)

SOLVER_ERRORS = (SolverError, SolvabilityError, NumericError, GeometryError, TopologyError, ConsistencyError,
                 SingularityError)


def exit_code_for(error: BaseException) -> int:
    """Exit code of a failed command."""
    if isinstance(error, (ConfigError, ValidationError)):
        return EXIT_CONFIG
    if isinstance(error, AcceptanceError):
        return EXIT_VALIDATION
    if isinstance(error, SOLVER_ERRORS):
        return EXIT_SOLVER
    return EXIT_UNEXPECTED


class ErrorHandlerMiddleware:
    """
    Middleware to catch and report errors.
    Expected failures get a one-line diagnostic; anything else is logged with its traceback.
    """

    async def __call__(
        self,
        handler: Callable[[Any, Dict[str, Any]], Awaitable[int]],
        args: Any,
        data: Dict[str, Any]
    ) -> int:
        try:
            return await handler(args, data)
        except ConfigError as e:
            where = f" ({e.key})" if e.key else ""
            self._report(f"Configuration error{where}: {e.message}")
            logger.warning(f"Config error: {e.message} (key: {e.key})")
            return exit_code_for(e)
        except ValidationError as e:
            where = f" ({e.field})" if e.field else ""
            self._report(f"Invalid parameter{where}: {e.message}")
            logger.warning(f"Validation error: {e.message} (field: {e.field})")
            return exit_code_for(e)
        except AcceptanceError as e:
            self._report(f"Validation failed: {e.message}")
            return exit_code_for(e)
        except BcOptError as e:
            self._report(f"{type(e).__name__}: {e}")
            logger.error(f"Solver error in '{data.get('command')}': {e}")
            return exit_code_for(e)
        except Exception as e:
            self._report(f"Unexpected error: {e}")
            logger.error(f"Unexpected error: {e}", exc_info=True)
            return EXIT_UNEXPECTED

    @staticmethod
    def _report(message: str) -> None:
        print(message, file=sys.stderr)
