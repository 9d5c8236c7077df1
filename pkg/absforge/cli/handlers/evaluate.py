import argparse
import json
import logging

from absforge.cli.common import EXIT_INPUT_ERROR, EXIT_OK, INPUT_ERRORS, add_budget_args, budgets_from_args
from absforge.debug.pipeline import run_asc
from absforge.debug.reports import DebugReport
from absforge.harness.evaluation import evaluate_abstraction
from absforge.proposer.documents import load_abstraction
from absforge.utils.storage import load_domain, load_instances, read_text, save_text


logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("eval", help="coverage of an abstraction on evaluation instances")
    parser.add_argument("--domain", required=True, help="PDDL domain file")
    parser.add_argument("--instances", nargs="*", default=[], help="evaluation instance files")
    parser.add_argument("--abstraction", required=True, help="abstraction document (JSON)")
    parser.add_argument("--output", help="write per-instance results as JSON to this file")
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
        logger.error(f"Abstraction is not usable: {built.summary()}")
        return EXIT_INPUT_ERROR
    policy = run_asc(built, budgets)
    if isinstance(policy, DebugReport):
        logger.error(f"Abstraction is not usable: {policy.summary()}")
        return EXIT_INPUT_ERROR

    result = evaluate_abstraction(built, policy, insts, budgets)
    for e in result.evaluations:
        print(f"{e.instance}: {'solved in ' + str(len(e.plan)) + ' steps' if e.solved else 'failed, ' + e.reason}")
    coverage = result.coverage
    print(f"Coverage: {'n/a' if coverage is None else f'{coverage:.3f}'} ({result.solved}/{len(result.evaluations)})")
    if args.output:
        payload = {"coverage": coverage, "evaluations": [e.model_dump() for e in result.evaluations]}
        await save_text(args.output, json.dumps(payload, ensure_ascii=False, indent=2))
    return EXIT_OK
