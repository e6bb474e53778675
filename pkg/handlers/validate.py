"""
Acceptance suites from the command line.
"""
import logging
from config import hash_document, settings
from handlers.common import in_thread
from handlers.router import Router, arg
from storage.files import ArtifactStore
from utils.constants import EXIT_OK
from utils.errors import AcceptanceError
from utils.formatters import format_check_table
from validation.suites import SUITES, run_suites

logger = logging.getLogger(__name__)
router = Router("validate")

COLUMNS = ["suite", "check", "passed", "value", "threshold"]


@router.command(
    "validate",
    help="Run acceptance suites and print a PASS/FAIL table",
    arguments=[
        arg("--suite", nargs="+", default=["all"], choices=["all"] + list(SUITES), help="suites to run"),
    ],
)
async def validate(args, data):
    results = await in_thread(run_suites, args.suite, data.get("executor"))
    print(format_check_table(result.as_row() for result in results))

    store = ArtifactStore(args.output or settings.output_dir, hash_document({"command": "validate",
                                                                             "suites": sorted(args.suite)}))
    await store.write_csv("validation.csv", [result.as_dict() for result in results], COLUMNS,
                          title="acceptance suites")

    failed = [f"{result.suite}.{result.name}" for result in results if not result.passed]
    if failed:
        raise AcceptanceError(f"{len(failed)} of {len(results)} checks failed: {', '.join(failed)}", failed)
    return EXIT_OK
