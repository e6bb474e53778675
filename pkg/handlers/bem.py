"""
Screen boundary-element commands: equilibrium sweeps and polarization tensors.
"""
import logging
from bem.sweep import default_eta, equilibrium_sweep, polarization_study
from config import hash_document, settings
from handlers.common import in_thread
from handlers.router import Router, arg
from storage.files import ArtifactStore
from utils.constants import DEFAULT_QUADRATURE_ORDER, EXIT_OK

logger = logging.getLogger(__name__)
router = Router("bem")

METRIC_COLUMNS = ["h", "eta", "R", "A", "E", "integral", "center"]


def _store(args, document: dict) -> ArtifactStore:
    return ArtifactStore(args.output or settings.output_dir, hash_document(document))


@router.command(
    "bem", "equilibrium",
    help="Solve the equilibrium screen problem over an (h, eta) grid and write the error metrics",
    arguments=[
        arg("--h", nargs="+", type=float, required=True, help="mesh sizes"),
        arg("--eta", nargs="+", type=float, required=True, help="regularization weights"),
        arg("--q", type=int, default=DEFAULT_QUADRATURE_ORDER, help="Gauss points per direction"),
    ],
)
async def bem_equilibrium(args, data):
    document = {"command": "bem equilibrium", "h": sorted(args.h), "eta": sorted(args.eta), "q": args.q}
    rows = await in_thread(equilibrium_sweep, args.h, args.eta, args.q, data.get("executor"))

    store = _store(args, document)
    await store.write_csv("equilibrium.csv", [row.as_row() for row in rows], METRIC_COLUMNS,
                          title="screen equilibrium metrics")
    for row in rows:
        print(f"h={row.h:.4g} eta={row.eta:.3e}  R={row.R:.3e} A={row.A:.3e} E={row.E:.3e}")
    return EXIT_OK


@router.command(
    "bem", "polarization",
    help="Compute the elastic polarization tensor of the disk crack and write it as JSON",
    arguments=[
        arg("--h", nargs="+", type=float, required=True, help="mesh sizes, refined jointly with eta"),
        arg("--mu", type=float, required=True, help="shear modulus"),
        arg("--nu", type=float, required=True, help="Poisson ratio"),
        arg("--eta", type=float, help="fixed regularization weight (default (h/10)^2)"),
        arg("--q", type=int, default=DEFAULT_QUADRATURE_ORDER, help="Gauss points per direction"),
    ],
)
async def bem_polarization(args, data):
    document = {"command": "bem polarization", "h": sorted(args.h), "mu": args.mu, "nu": args.nu,
                "eta": args.eta, "q": args.q}
    rule = default_eta if args.eta is None else (lambda h: args.eta)
    tensors, changes = await in_thread(polarization_study, args.h, args.mu, args.nu, rule, args.q,
                                       data.get("executor"))

    store = _store(args, document)
    await store.write_json("polarization.json", {
        "tensors": [tensor.to_dict() for tensor in tensors],
        "relative_changes": changes,
        "M": tensors[-1].M,
    })
    finest = tensors[-1]
    print(f"M (h={finest.h:.4g}, eta={finest.eta:.3e}):")
    for line in finest.M:
        print("  " + "  ".join(f"{value: .6e}" for value in line))
    return EXIT_OK
