import argparse
import json
import logging

from absforge.cli.common import (
    EXIT_INPUT_ERROR,
    EXIT_OK,
    EXIT_REJECTED,
    INPUT_ERRORS,
    add_budget_args,
    budgets_from_args,
)
from absforge.debug.pipeline import Accepted, plans_as_text, run_pipeline
from absforge.debug.reports import DebugReport
from absforge.proposer.documents import load_abstraction
from absforge.utils.storage import load_domain, load_instances, read_text, save_text


logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("check", help="run the staged checks on one abstraction document")
    parser.add_argument("--domain", required=True, help="PDDL domain file")
    parser.add_argument("--instances", nargs="+", required=True, help="training instance files, checked in order")
    parser.add_argument("--abstraction", required=True, help="abstraction document (JSON)")
    parser.add_argument("--output", help="write the outcome as JSON to this file")
    add_budget_args(parser)
    parser.set_defaults(handler=handle)


async def handle(args: argparse.Namespace) -> int:
    try:
        dom = await load_domain(args.domain)
        insts = await load_instances(args.instances, dom)
        text = await read_text(args.abstraction)
        budgets = budgets_from_args(args)
    except INPUT_ERRORS as e:
        logger.error(f"Input error: {e}")
        return EXIT_INPUT_ERROR

    built = load_abstraction(text, dom)
    if isinstance(built, DebugReport):
        outcome_json = {"accepted": False, "report": built.to_json()}
        print(built.summary())
        code = EXIT_REJECTED
    else:
        outcome = run_pipeline(built, insts, budgets=budgets)
        if isinstance(outcome, Accepted):
            outcome_json = {
                "accepted": True,
                "policy": outcome.policy.to_json(),
                "plans": plans_as_text(outcome),
            }
            print(f"Accepted on {len(insts)} instance(s)")
            print(outcome.policy)
            for name, plan in outcome_json["plans"].items():
                print(f"{name}: {' '.join(plan)}")
            code = EXIT_OK
        else:
            outcome_json = {"accepted": False, "report": outcome.report.to_json()}
            print(outcome.report.summary())
            code = EXIT_REJECTED

    if args.output:
        await save_text(args.output, json.dumps(outcome_json, ensure_ascii=False, indent=2))
    return code
