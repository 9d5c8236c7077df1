import argparse
import logging

from absforge.cli.common import (
    EXIT_EXHAUSTED,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    INPUT_ERRORS,
    add_budget_args,
    run_config_from_args,
)
from absforge.harness.loop import run_loop
from absforge.utils.storage import save_run_record


logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("loop", help="generate, debug and evaluate an abstraction")
    parser.add_argument("--config", help="RunConfig JSON file; flags below override it")
    parser.add_argument("--domain", help="PDDL domain file")
    parser.add_argument("--training", nargs="+", help="training instance files")
    parser.add_argument("--evaluation", nargs="+", help="evaluation instance files")
    parser.add_argument("--max-iterations", type=int, help="upper bound N on fix prompts")
    parser.add_argument("--training-split", help="'init:debug' instance counts, e.g. 2:2")
    parser.add_argument("--no-debug", action="store_true", help="one proposal, no feedback")
    parser.add_argument("--script", nargs="+", help="scripted replies for the file proposer, in call order")
    parser.add_argument("--endpoint", help="chat-completions base URL of the LLM proposer")
    parser.add_argument("--model", help="model name of the LLM proposer")
    parser.add_argument("--label", help="proposer label used in the tables")
    parser.add_argument("--output-dir", help="directory for run records")
    parser.add_argument("--seed", type=int)
    add_budget_args(parser)
    parser.set_defaults(handler=handle)


async def handle(args: argparse.Namespace) -> int:
    try:
        cfg = await run_config_from_args(args)
        record = await run_loop(cfg)
    except INPUT_ERRORS as e:
        logger.error(f"Input error: {e}")
        return EXIT_INPUT_ERROR

    run_dir, path = await save_run_record(record, cfg.output_dir)
    logger.info(f"Run record saved to {path}")
    print(record.format_summary())
    print(f"Record: {path}")
    return EXIT_OK if record.accepted else EXIT_EXHAUSTED
