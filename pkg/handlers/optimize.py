"""
Optimization commands: the full shape/topology loop of a run configuration.
"""
import logging
from typing import Dict, List
import numpy as np
from config import RunConfig
from handlers.common import in_thread, open_store, read_config, region_document, setup, with_overrides
from handlers.router import Router, arg
from optimizer.loop import Optimizer
from optimizer.models import OptHistory
from storage.files import ArtifactStore
from storage.vtk import format_vtk
from utils.constants import EXIT_OK, FORMAT_VTK
from utils.formatters import format_header_comment

logger = logging.getLogger(__name__)
router = Router("optimize")

HISTORY_COLUMNS = ["iter", "J", "area", "cont", "J_tot", "tau", "event", "interfaces"]


def _optimize(run: RunConfig, snapshots: Dict[str, str], digest: str):
    context = setup(run)
    hook = None
    if snapshots is not None:
        def hook(record, evaluation):
            header = format_header_comment(digest, f"iteration {record.iteration} {record.event}")
            name = f"snapshots/iter_{record.iteration:04d}.vtk"
            snapshots[name] = format_vtk(context.mesh, {"u": evaluation.state.values}, header)

    regions, history = Optimizer(context.problem, on_iteration=hook).run(context.regions)
    final = context.problem.evaluate(regions)
    return context, final, history


async def run_optimization(run: RunConfig, store: ArtifactStore, snapshots: bool = False) -> OptHistory:
    """Run the loop and write history.csv, region.json, final.vtk and optional snapshots."""
    collected = {} if snapshots and store.enabled(FORMAT_VTK) else None
    context, final, history = await in_thread(_optimize, run, collected, store.config_hash)
    names = context.problem.regions

    await store.write_csv("history.csv", history.as_rows(), HISTORY_COLUMNS, title=f"optimize {context.problem.name}")
    await store.write_json("region.json", {
        "problem": context.problem.name,
        "iterations": history.last.iteration,
        "J": final.J,
        "J_tot": final.J_tot,
        "area": final.area,
        "cont": final.cont,
        "regions": region_document(list(final.regions), names),
    })
    point_data = {"u": final.state.values}
    for name, ls in zip(names, final.regions):
        point_data[f"phi_{name}"] = _boundary_phi(context.mesh, ls)
    await store.write_vtk("final", context.mesh, point_data, title="final region")
    for name, text in (collected or {}).items():
        await store.write_text(name, text, FORMAT_VTK)

    _report(history)
    return history


def _boundary_phi(mesh, ls):
    values = np.zeros(mesh.n_vertices)
    values[mesh.loop_vertices(ls.loop_ref)] = ls.phi
    return values


def _report(history: OptHistory) -> None:
    first, last = history.records[0], history.last
    change = (last.J_tot - first.J_tot) / abs(first.J_tot) if first.J_tot else 0.0
    counts: List[str] = []
    for event in sorted({record.event for record in history}):
        counts.append(f"{event} {len(history.events(event))}")
    print(f"J_tot {first.J_tot:.6e} -> {last.J_tot:.6e} ({change:+.1%}) after {last.iteration} iterations")
    print(f"  events: {', '.join(counts)}")


@router.command(
    "optimize",
    help="Run the shape and topology optimization loop",
    arguments=[
        arg("--config", required=True, help="JSON run configuration"),
        arg("--snapshots", action="store_true", help="write the state of every iteration as VTK"),
        arg("--max-iter", dest="max_iter", type=int, help="override optimizer.max_iter"),
    ],
)
async def optimize(args, data):
    run = with_overrides(read_config(args.config), "optimizer", max_iter=args.max_iter)
    store = open_store(run, args)
    await run_optimization(run, store, args.snapshots or run.output.snapshots)
    return EXIT_OK
