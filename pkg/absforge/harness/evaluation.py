import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from absforge.app.models import Budgets, InstanceEvaluation
from absforge.debug.refined_tree import execute_refined_policy
from absforge.planning.pddl_core import GpInstance, validate_plan
from absforge.planning.qnp_model import Policy
from absforge.planning.refinement import Abstraction


logger = logging.getLogger(__name__)


@dataclass
class Evaluation:
    evaluations: List[InstanceEvaluation] = field(default_factory=list)

    @property
    def solved(self) -> int:
        return sum(1 for e in self.evaluations if e.solved)

    @property
    def coverage(self) -> Optional[float]:
        """Solved fraction; None for an empty evaluation set."""
        if not self.evaluations:
            return None
        return self.solved / len(self.evaluations)


def evaluate_abstraction(A: Abstraction, pi: Policy, eval_insts: Sequence[GpInstance],
                         budgets: Optional[Budgets] = None) -> Evaluation:
    """Refine ``pi`` on every evaluation instance; only validated plans count as solved."""
    budgets = budgets or Budgets()
    result = Evaluation()
    if not eval_insts:
        logger.info("No evaluation instances, coverage not applicable")
        return result
    for inst in eval_insts:
        run = execute_refined_policy(A, pi, inst, budgets.execution_step_bound, budgets.tree_nodes)
        if not run.solved:
            result.evaluations.append(InstanceEvaluation(instance=inst.name, solved=False, reason=run.reason))
            continue
        check = validate_plan(inst, run.plan)
        if not check.valid:
            logger.error(f"Refined plan for {inst.name} failed validation at step {check.failed_at}")
            result.evaluations.append(InstanceEvaluation(
                instance=inst.name, solved=False, reason=f"plan failed validation at step {check.failed_at}",
            ))
            continue
        result.evaluations.append(InstanceEvaluation(
            instance=inst.name, solved=True, plan=[step.to_pddl() for step in run.plan],
        ))
    logger.info(f"Coverage {result.solved}/{len(result.evaluations)}")
    return result
