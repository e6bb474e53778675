"""
Topological derivative of the initial region of a run configuration.
"""
import logging
from typing import List
import numpy as np
from derivatives.topological import select_insertion_point
from handlers.common import in_thread, open_store, read_config, setup
from handlers.router import Router, arg
from region.levelset import circular_distance
from utils.constants import EXIT_OK

logger = logging.getLogger(__name__)
router = Router("topo")

COLUMNS = ["region", "vertex", "s", "x", "y", "value"]


def _on_base_mesh(mesh, tf) -> np.ndarray:
    """Boundary vertices of the base mesh take the value of the nearest admissible vertex; zero elsewhere."""
    nodal = np.zeros(mesh.n_vertices)
    if len(tf.s):
        s = mesh.loop_arclength(tf.loop_ref)
        nearest = circular_distance(s[:, None], tf.s[None, :], mesh.loop_perimeter(tf.loop_ref)).argmin(axis=1)
        nodal[mesh.loop_vertices(tf.loop_ref)] = tf.values[nearest]
    return nodal


def _fields(run):
    context = setup(run)
    config = context.problem.config
    delta = config.exclusion_distance(context.regions[0].perimeter)
    return context, delta, context.problem.topo_fields(context.regions, delta)


@router.command(
    "topo-field",
    help="Compute the topological derivative on the admissible boundary and write CSV and VTK",
    arguments=[arg("--config", required=True, help="JSON run configuration")],
)
async def topo_field_command(args, data):
    run = read_config(args.config)
    context, delta, fields = await in_thread(_fields, run)
    mesh, names = context.mesh, context.problem.regions

    rows: List[dict] = []
    best = {}
    point_data = {}
    for name, tf in zip(names, fields):
        if tf is None:
            continue
        for vertex, s, value in zip(tf.vertices, tf.s, tf.values):
            _, _, point = mesh.point_on_loop(s, tf.loop_ref)
            rows.append({"region": name, "vertex": int(vertex), "s": float(s), "x": float(point[0]),
                         "y": float(point[1]), "value": float(value)})
        point_data[f"topo_{name}"] = _on_base_mesh(mesh, tf)
        choice = select_insertion_point(tf)
        best[name] = {
            "variant": tf.variant,
            "rho_kind": tf.rho_kind,
            "admissible": int(len(tf.values)),
            "insertion_s": tf.arclength_of(choice[0]) if choice else None,
            "insertion_value": choice[1] if choice else None,
        }

    store = open_store(run, args)
    await store.write_csv("topo_field.csv", rows, COLUMNS, title="topological derivative")
    await store.write_vtk("topo_field", mesh, point_data, title="topological derivative")
    await store.write_json("topo_field.json", {"delta_excl": delta, "regions": best})
    for name, summary in best.items():
        where = "none" if summary["insertion_s"] is None else f"s = {summary['insertion_s']:.4g}"
        print(f"{name}: {summary['admissible']} admissible vertices ({summary['variant']}), insertion {where}")
    return EXIT_OK
