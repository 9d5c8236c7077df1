"""The four staged checks: ASC, HLISC, HLPRC (refined tree) and LLGRC."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

from absforge.app.errors import ResourceLimit
from absforge.app.models import Budgets
from absforge.debug.refined_tree import (
    HlPlan,
    RefinedTree,
    RefinementError,
    RefinementSuccess,
    build_refined_tree,
    run_llgrc,
)
from absforge.debug.reports import DebugReport
from absforge.planning.pddl_core import GpInstance, Plan, validate_plan
from absforge.planning.qnp_format import format_qnp
from absforge.planning.qnp_model import Policy, QnpAction, QState, apply_quantitative
from absforge.planning.qnp_solver import ExecutionStatus, SolveStatus, execute_policy_q, solve
from absforge.planning.refinement import Abstraction, HlInstance, MismatchReport, check_hl_instance
from absforge.states.stages import DebugStage


logger = logging.getLogger(__name__)


@dataclass
class Accepted:
    policy: Policy
    plans: Dict[str, Plan] = field(default_factory=dict)
    hl_plans: Dict[str, HlPlan] = field(default_factory=dict)

    accepted = True


@dataclass
class Rejected:
    report: DebugReport
    policy: Optional[Policy] = None

    accepted = False

    @property
    def stage(self) -> DebugStage:
        return self.report.stage


PipelineOutcome = Union[Accepted, Rejected]


def run_asc(A: Abstraction, budgets: Optional[Budgets] = None) -> Union[Policy, DebugReport]:
    budgets = budgets or Budgets()
    outcome = solve(A.qnp, budgets.solver_nodes, budgets.solver_time)
    if outcome.status == SolveStatus.SOLVED:
        return outcome.policy
    stage = DebugStage.ASC_UNSOLVABLE if outcome.status == SolveStatus.UNSOLVABLE else DebugStage.ASC_TIMEOUT
    logger.info(f"ASC failed: {stage.value} ({outcome.message})")
    return DebugReport(
        stage=stage,
        message=outcome.message,
        payload={"reason": outcome.message, "expanded": outcome.expanded, "qnp": format_qnp(A.qnp)},
    )


def default_step_bound(counts: Dict[str, int]) -> int:
    return 10 * (1 + sum(counts.values()))


class UnitStepOracle:
    """Resolves dec branches by tracking the concrete counts in unit steps."""

    def __init__(self, A: Abstraction, counts: Dict[str, int]):
        self.A = A
        self.counts = dict(counts)

    def __call__(self, q: QState, action: QnpAction) -> QState:
        bools = {name: value for name, value in q.bools}
        bools, self.counts = apply_quantitative(action, bools, self.counts)
        values = dict(bools)
        values.update({name: count > 0 for name, count in self.counts.items()})
        return self.A.qnp.make_qstate(values)


def run_hlisc(A: Abstraction, pi: Policy, inst: GpInstance,
              step_bound: Optional[int] = None) -> Union[HlPlan, DebugReport]:
    checked = check_hl_instance(A, inst)
    if isinstance(checked, MismatchReport):
        return DebugReport(
            stage=DebugStage.HLISC_BAD_INSTANCE,
            instance_id=inst.name,
            message="; ".join(str(v) for v in checked.violations),
            payload={
                "violated": [
                    {"side": v.side, "literal": v.literal, "feature": v.feature, "value": v.value}
                    for v in checked.violations
                ],
                "init_valuation": str(checked.init_valuation),
                "goal_valuation": str(checked.goal_valuation),
            },
        )
    hl: HlInstance = checked
    counts = dict(hl.init_valuation.num_vals)
    bound = step_bound if step_bound is not None else default_step_bound(counts)
    run = execute_policy_q(pi, hl.init_qstate, A.qnp, UnitStepOracle(A, counts), bound)
    if run.status == ExecutionStatus.GOAL:
        logger.info(f"HLISC passed on {inst.name}: HL plan of length {len(run.trace)}")
        return HlPlan(actions=run.actions, qstates=run.qstates)
    if run.status == ExecutionStatus.ABORTED:
        stage = DebugStage.HLISC_ABORTED
        message = f"policy aborted before reaching the goal at [{run.final}]"
    else:
        stage = DebugStage.HLISC_TIMEOUT
        message = f"policy execution did not reach the goal within {bound} steps"
    logger.info(f"HLISC failed on {inst.name}: {message}")
    return DebugReport(
        stage=stage,
        instance_id=inst.name,
        message=message,
        payload={
            "qstate": str(run.final),
            "actions": run.actions[-20:],
            "step_bound": bound,
            "init_qstate": str(hl.init_qstate),
        },
    )


def check_instance(A: Abstraction, pi: Policy, inst: GpInstance,
                   budgets: Budgets) -> Union[RefinementSuccess, DebugReport]:
    """HLISC, then HLPRC, then LLGRC on one training instance."""
    sigma = run_hlisc(A, pi, inst, budgets.hlisc_step_bound)
    if isinstance(sigma, DebugReport):
        return sigma
    outcome = build_refined_tree(A, inst, sigma, len(sigma), budgets.tree_nodes)
    if isinstance(outcome, RefinementError):
        return outcome.report
    if isinstance(outcome, RefinementSuccess):
        return outcome
    tree: RefinedTree = outcome
    try:
        report = run_llgrc(tree, inst, len(sigma), budgets.bfs_nodes)
    except ResourceLimit as e:
        logger.warning(f"LLGRC on {inst.name} stopped: {e}")
        return DebugReport(
            stage=DebugStage.LLGRC_TIMEOUT,
            instance_id=inst.name,
            message=f"goal reachability check ran out of budget: {e}",
            payload={
                "reason": str(e),
                "budget": e.budget,
                "expanded": e.expanded,
                "plan": list(sigma.actions),
            },
        )
    if report is not None:
        return report
    # Full-depth tree, no success and no diagnosis: report the leaves as unrefined
    leaves = tree.layers.get(tree.depth, [])
    leaf = leaves[0] if leaves else tree.root
    return DebugReport(
        stage=DebugStage.HLPRC_NO_REFINEMENT,
        instance_id=inst.name,
        message=(f"the HL plan was refined to depth {tree.depth} but no leaf satisfies both the "
                 f"abstract and the concrete goal"),
        payload={
            "qstate": str(leaf.qstate),
            "hl_action": sigma.actions[-1] if sigma.actions else "(goal)",
            "layer": leaf.layer,
            "plan": list(sigma.actions),
            "candidates": [],
            "ll_state": leaf.ll_state.to_pddl(),
            "transitions": [],
        },
    )


def run_pipeline(A: Abstraction, insts: Sequence[GpInstance], step_bound: Optional[int] = None,
                 budgets: Optional[Budgets] = None) -> PipelineOutcome:
    """ASC once, then per instance in order; the first failure wins."""
    budgets = budgets or Budgets()
    if step_bound is not None:
        budgets = budgets.model_copy(update={"hlisc_step_bound": step_bound})
    policy = run_asc(A, budgets)
    if isinstance(policy, DebugReport):
        return Rejected(policy)
    accepted = Accepted(policy)
    for inst in insts:
        result = check_instance(A, policy, inst, budgets)
        if isinstance(result, DebugReport):
            logger.info(f"Abstraction rejected: {result.summary()}")
            return Rejected(result, policy)
        # independent replay of the refined plan
        check = validate_plan(inst, result.plan)
        if not check.valid:
            raise AssertionError(f"refined plan for {inst.name} failed validation at step {check.failed_at}")
        accepted.plans[inst.name] = result.plan
        accepted.hl_plans[inst.name] = result.tree.plan
    logger.info(f"Abstraction accepted on {len(insts)} training instances")
    return accepted


def plans_as_text(outcome: Accepted) -> Dict[str, List[str]]:
    return {name: [step.to_pddl() for step in plan] for name, plan in outcome.plans.items()}
