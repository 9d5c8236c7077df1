import argparse
import asyncio
import logging
import sys
from typing import List, Optional

from absforge.cli.handlers import check, evaluate, loop, report, solve_qnp


# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    handlers=[
        logging.StreamHandler(sys.stdout)
    ]
)

# Get logger
logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="absforge", description="Check and repair QNP abstractions of planning domains.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Register subcommands in the order they are listed in --help
    solve_qnp.register(subparsers)
    check.register(subparsers)
    loop.register(subparsers)
    evaluate.register(subparsers)
    report.register(subparsers)
    return parser


async def main(argv: Optional[List[str]] = None) -> int:
    """Parse the command line and run one subcommand."""
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    logger.debug(f"Running {args.command}")
    return await args.handler(args)


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
