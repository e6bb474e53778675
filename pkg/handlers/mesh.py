"""
Mesh generation command.
"""
import logging
from handlers.common import build_mesh, in_thread, open_store, read_config, with_overrides
from handlers.router import Router, arg
from utils.constants import EXIT_OK

logger = logging.getLogger(__name__)
router = Router("mesh")


@router.command(
    "mesh", "gen",
    help="Generate a disk, square or screen-disk mesh and write MEDIT and VTK files",
    arguments=[
        arg("--config", help="JSON run configuration supplying the mesh section"),
        arg("--shape", choices=["disk", "square", "screen-disk"]),
        arg("--target-h", dest="target_h", type=float, help="target mesh size"),
        arg("--size", type=float, help="disk radius or square side"),
        arg("--n-boundary", dest="n_boundary", type=int, help="boundary vertices of the disk"),
    ],
)
async def mesh_gen(args, data):
    run = with_overrides(read_config(args.config), "mesh", shape=args.shape, target_h=args.target_h,
                         size=args.size, n_boundary=args.n_boundary)
    mesh = await in_thread(build_mesh, run.mesh)
    await in_thread(mesh.audit)

    store = open_store(run, args)
    paths = await store.write_mesh("mesh", mesh, title=f"mesh {run.mesh.shape}")
    print(f"{run.mesh.shape} mesh: {mesh.n_vertices} vertices, {mesh.n_triangles} triangles, h = {mesh.h:.4g}")
    for path in paths:
        print(f"  wrote {path}")
    return EXIT_OK
