"""
Preconfigured 2D optimization demos.
"""
import logging
from handlers.common import open_store
from handlers.optimize import run_optimization
from handlers.router import Router, arg
from utils.constants import EXIT_OK
from validation.demos import DEMO_CONFIGS, demo_config

logger = logging.getLogger(__name__)
router = Router("demo")


@router.command(
    "demo",
    help="Run a preconfigured optimization: mixer2d, supports2d or cloak2d",
    arguments=[
        arg("name", choices=sorted(DEMO_CONFIGS)),
        arg("--snapshots", action="store_true", help="write the state of every iteration as VTK"),
    ],
)
async def demo(args, data):
    run = demo_config(args.name)
    store = open_store(run, args)
    logger.info(f"Demo '{args.name}' writing to {store.directory}")
    await run_optimization(run, store, args.snapshots)
    return EXIT_OK
