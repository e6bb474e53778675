"""
Single state and adjoint solve for the initial region of a run configuration.
"""
import logging
import numpy as np
from handlers.common import in_thread, open_store, read_config, region_document, setup
from handlers.router import Router, arg
from utils.constants import EXIT_OK

logger = logging.getLogger(__name__)
router = Router("solve")


def _solve(run):
    context = setup(run)
    evaluation = context.problem.evaluate(context.regions)
    adjoint = context.problem.adjoint(evaluation)
    return context, evaluation, adjoint


@router.command(
    "solve",
    help="Solve the state and adjoint problems once and write the fields",
    arguments=[arg("--config", required=True, help="JSON run configuration")],
)
async def solve(args, data):
    run = read_config(args.config)
    context, evaluation, adjoint = await in_thread(_solve, run)
    problem = context.problem

    store = open_store(run, args)
    await store.write_vtk("fields", context.mesh, {"u": evaluation.state.values, "p": adjoint.values},
                          title=f"solve {problem.name}")
    await store.write_json("solve.json", {
        "problem": problem.name,
        "J": evaluation.J,
        "area": evaluation.area,
        "cont": evaluation.cont,
        "J_tot": evaluation.J_tot,
        "state_residual": evaluation.state.residual,
        "adjoint_residual": adjoint.residual,
        "state_max": float(np.abs(evaluation.state.values).max()),
        "regions": region_document(list(evaluation.regions), problem.regions),
    })
    print(f"{problem.name}: J = {evaluation.J:.6e}, J_tot = {evaluation.J_tot:.6e}, "
          f"area = {evaluation.area:.4g}, cont = {evaluation.cont}")
    return EXIT_OK
