import argparse
import logging
import os

from absforge.cli.common import EXIT_INPUT_ERROR, EXIT_OK, INPUT_ERRORS
from absforge.harness.reporting import FOOTER, report
from absforge.utils.storage import load_run_records, save_text


logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("report", help="coverage and detected-error tables over run records")
    parser.add_argument("records", nargs="*", help="run record files or directories searched for records")
    parser.add_argument("--csv-dir", help="also write coverage.csv and errors.csv here")
    parser.set_defaults(handler=handle)


async def handle(args: argparse.Namespace) -> int:
    try:
        records = await load_run_records(args.records)
    except INPUT_ERRORS as e:
        logger.error(f"Cannot read run records: {e}")
        return EXIT_INPUT_ERROR

    coverage, errors = report(records)
    print(coverage.to_text())
    print()
    print(errors.to_text())
    print()
    print(FOOTER)
    if args.csv_dir:
        await save_text(os.path.join(args.csv_dir, "coverage.csv"), coverage.to_csv())
        await save_text(os.path.join(args.csv_dir, "errors.csv"), errors.to_csv())
    return EXIT_OK
