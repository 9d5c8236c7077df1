import argparse
import json
import logging

from absforge.cli.common import (
    EXIT_INPUT_ERROR,
    EXIT_OK,
    EXIT_REJECTED,
    EXIT_RESOURCE_LIMIT,
    INPUT_ERRORS,
    add_budget_args,
    budgets_from_args,
)
from absforge.planning.qnp_format import parse_qnp
from absforge.planning.qnp_solver import SolveStatus, solve
from absforge.utils.storage import read_text, save_text


logger = logging.getLogger(__name__)

EXIT_CODES = {
    SolveStatus.SOLVED: EXIT_OK,
    SolveStatus.UNSOLVABLE: EXIT_REJECTED,
    SolveStatus.RESOURCE_LIMIT: EXIT_RESOURCE_LIMIT,
}

STATUS_TOKENS = {
    SolveStatus.SOLVED: "SOLVED",
    SolveStatus.UNSOLVABLE: "UNSOLVABLE",
    SolveStatus.RESOURCE_LIMIT: "RESOURCE-LIMIT",
}


def register(subparsers) -> None:
    parser = subparsers.add_parser("solve-qnp", help="solve a standalone .qnp listing")
    parser.add_argument("qnp", help="path of the .qnp file")
    parser.add_argument("--output", help="write the policy as JSON to this file")
    add_budget_args(parser)
    parser.set_defaults(handler=handle)


async def handle(args: argparse.Namespace) -> int:
    try:
        P = parse_qnp(await read_text(args.qnp))
        budgets = budgets_from_args(args)
    except INPUT_ERRORS as e:
        logger.error(f"Cannot read {args.qnp}: {e}")
        return EXIT_INPUT_ERROR

    outcome = solve(P, budgets.solver_nodes, budgets.solver_time)
    logger.info(f"Solver {outcome.status.value} after {outcome.expanded} nodes"
                + (f": {outcome.message}" if outcome.message else ""))
    print(STATUS_TOKENS[outcome.status])
    if outcome.solved:
        print(outcome.policy)
        if args.output:
            await save_text(args.output, json.dumps(outcome.policy.to_json(), ensure_ascii=False, indent=2))
    return EXIT_CODES[outcome.status]
