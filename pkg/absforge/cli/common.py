import argparse
import logging
from typing import Optional

from pydantic import ValidationError

from absforge.app.errors import AbsforgeError
from absforge.app.models import Budgets, ProposerConfig, RunConfig
from absforge.utils.storage import load_run_config


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_RESOURCE_LIMIT = 2
EXIT_EXHAUSTED = 3
EXIT_INPUT_ERROR = 4

# Errors that mean "the inputs are wrong" rather than "the abstraction is wrong"
INPUT_ERRORS = (AbsforgeError, OSError, ValidationError, ValueError)


def add_budget_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("budgets")
    group.add_argument("--solver-nodes", type=int, help="QNP solver node budget")
    group.add_argument("--solver-time", type=float, help="QNP solver time limit in seconds")
    group.add_argument("--bfs-nodes", type=int, help="state budget of bounded reachability")
    group.add_argument("--tree-nodes", type=int, help="node budget of refinement searches")
    group.add_argument("--step-bound", type=int, dest="hlisc_step_bound", help="HL policy execution step bound")


def budgets_from_args(args: argparse.Namespace, base: Optional[Budgets] = None) -> Budgets:
    base = base or Budgets()
    overrides = {
        name: getattr(args, name)
        for name in ("solver_nodes", "solver_time", "bfs_nodes", "tree_nodes", "hlisc_step_bound")
        if getattr(args, name, None) is not None
    }
    return Budgets.model_validate({**base.model_dump(), **overrides})


async def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    """Config file (if any) with command-line flags layered on top."""
    data = (await load_run_config(args.config)).model_dump() if args.config else {}
    for name in ("domain", "training", "evaluation", "max_iterations", "training_split", "output_dir", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    if args.no_debug:
        data["debugging"] = False

    proposer = dict(data.get("proposer") or ProposerConfig().model_dump())
    if args.script:
        proposer.update(kind="file", paths=args.script)
    for name in ("endpoint", "model", "label"):
        value = getattr(args, name, None)
        if value is not None:
            proposer[name] = value
    if args.endpoint or args.model:
        proposer["kind"] = "llm"
    data["proposer"] = proposer

    cfg = RunConfig.model_validate(data)
    return cfg.model_copy(update={"budgets": budgets_from_args(args, cfg.budgets)})
