"""
Main entry point for the bcopt command line.
Registers all command routers and middleware, then dispatches argv.
"""
import asyncio
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

# Import handlers
from handlers.router import Dispatcher
from handlers.mesh import router as mesh_router
from handlers.solve import router as solve_router
from handlers.topo import router as topo_router
from handlers.optimize import router as optimize_router
from handlers.bem import router as bem_router
from handlers.validate import router as validate_router
from handlers.demo import router as demo_router

# Import middleware
from middleware.error_handler import ErrorHandlerMiddleware
from middleware.logging_middleware import LoggingMiddleware

from config import settings

logger = logging.getLogger(__name__)


def build_dispatcher() -> Dispatcher:
    """
    Build the dispatcher with all routers, middleware and global options.

    Returns:
        Dispatcher ready to dispatch argv
    """
    dp = Dispatcher(
        prog="bcopt",
        description="Boundary-condition region optimization in 2D and screen contact problems in 3D"
    )

    dp.add_global_argument("--output", default=None, help="artifact directory (overrides config and BCOPT_OUTPUT_DIR)")
    dp.add_global_argument("-v", "--verbose", action="store_true", help="debug logging")

    # Order matters: first registered is outermost
    dp.add_middleware(ErrorHandlerMiddleware())
    dp.add_middleware(LoggingMiddleware())

    dp.include_router(mesh_router)
    dp.include_router(solve_router)
    dp.include_router(topo_router)
    dp.include_router(optimize_router)
    dp.include_router(bem_router)
    dp.include_router(validate_router)
    dp.include_router(demo_router)
    return dp


async def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command.
    The shared thread pool is handed to handlers for parallel sweeps.
    """
    logging.basicConfig(
        level=settings.log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    dp = build_dispatcher()
    with ThreadPoolExecutor(max_workers=settings.threads) as executor:
        return await dp.dispatch(argv, {"executor": executor, "settings": settings})


if __name__ == '__main__':
    try:
        sys.exit(asyncio.run(main(sys.argv[1:])))
    except KeyboardInterrupt:
        print("Interrupted!")
        sys.exit(130)
