"""Refined-tree construction, tree auditing, the LL goal reachability check
and evaluation-time refinement of a policy."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple, Union

from absforge.config.config import BFS_NODE_BUDGET, EXECUTION_STEP_BOUND, TREE_NODE_BUDGET
from absforge.debug.reports import DebugReport
from absforge.planning.pddl_core import (
    GpInstance,
    GroundAction,
    GroundState,
    Plan,
    applicable,
    apply,
    bounded_goal_reachable,
    holds_goal,
)
from absforge.planning.qnp_model import Policy, QState, is_goal_q
from absforge.planning.refinement import (
    AbstractValuation,
    Abstraction,
    abstract_state,
    hl_action,
    is_refinement,
    to_qstate,
    transition_consistent,
)
from absforge.states.stages import DebugStage


logger = logging.getLogger(__name__)

MAX_RECORDED_TRANSITIONS = 20


@dataclass
class HlPlan:
    """HL action sequence with the qstate expected before each step and after the last."""
    actions: List[str]
    qstates: List[QState]

    def __len__(self) -> int:
        return len(self.actions)


@dataclass(eq=False)
class TreeNode:
    ll_state: GroundState
    hl_valuation: AbstractValuation
    expected_qstate: QState
    layer: int
    in_action_ll: Optional[GroundAction] = None
    in_action_hl: Optional[str] = None
    parent: Optional["TreeNode"] = field(default=None, repr=False)
    children: List["TreeNode"] = field(default_factory=list, repr=False)

    @property
    def qstate(self) -> QState:
        return to_qstate(self.hl_valuation)

    def path(self) -> List[GroundAction]:
        steps = []
        node = self
        while node.parent is not None:
            steps.append(node.in_action_ll)
            node = node.parent
        return list(reversed(steps))


@dataclass
class RefinedTree:
    root: TreeNode
    k: int
    depth: int = 0
    layers: Dict[int, List[TreeNode]] = field(default_factory=dict)
    plan: Optional[HlPlan] = None

    def nodes(self) -> List[TreeNode]:
        return [node for layer in sorted(self.layers) for node in self.layers[layer]]

    def add(self, node: TreeNode) -> None:
        self.layers.setdefault(node.layer, []).append(node)
        self.depth = max(self.depth, node.layer)


@dataclass
class RefinementSuccess:
    plan: Plan
    tree: RefinedTree


@dataclass
class RefinementError:
    report: DebugReport


TreeOutcome = Union[RefinementSuccess, RefinementError, RefinedTree]


def _transition_record(node: TreeNode, action: GroundAction, expected: Optional[QState], got: AbstractValuation,
                       reason: str) -> Dict[str, str]:
    return {
        "layer": node.layer,
        "hl_action": node.in_action_hl or "",
        "ll_action": action.to_pddl(),
        "from": str(node.qstate),
        "to": str(to_qstate(got)),
        "expected": str(expected) if expected is not None else "",
        "reason": reason,
    }


def build_refined_tree(A: Abstraction, inst: GpInstance, sigma_h: HlPlan, k: Optional[int] = None,
                       node_budget: int = TREE_NODE_BUDGET) -> TreeOutcome:
    """Depth-first refinement of ``sigma_h`` on ``inst``, one layer per HL step.

    A child is expanded when its ground action refines the HL action of the
    layer, the child valuation is direction-consistent with it and its qstate
    is the one the HL plan expects next. A state already expanded at the same
    layer is not expanded twice.
    """
    k = len(sigma_h) if k is None else k
    m = A.mapping
    root_val = abstract_state(m, inst.init, inst)
    root = TreeNode(inst.init, root_val, sigma_h.qstates[0] if sigma_h.qstates else to_qstate(root_val), 0)
    tree = RefinedTree(root=root, k=k, plan=sigma_h)
    tree.add(root)

    transitions: List[Dict[str, str]] = []
    blocked: Optional[Tuple[TreeNode, List[GroundAction]]] = None
    expanded: Set[Tuple[GroundState, int]] = set()
    stack = [root]
    budget_hit = False

    while stack:
        node = stack.pop()
        if node.layer >= k:
            if is_goal_q(node.qstate, A.qnp) and holds_goal(node.ll_state, inst.goal):
                plan = Plan(tuple(node.path()))
                logger.info(f"Refined HL plan of length {k} on {inst.name} after {len(tree.nodes())} nodes")
                return RefinementSuccess(plan, tree)
            continue
        key = (node.ll_state, node.layer)
        if key in expanded:
            continue
        expanded.add(key)
        if len(expanded) > node_budget:
            budget_hit = True
            logger.warning(f"Refined tree for {inst.name} hit the node budget {node_budget}")
            break

        name = sigma_h.actions[node.layer]
        action = hl_action(A, name)
        expected = sigma_h.qstates[node.layer + 1]
        candidates = [a for a in inst.ground_actions if applicable(node.ll_state, a)]
        children = []
        for ground in candidates:
            if not is_refinement(ground, name, m):
                continue
            state = apply(node.ll_state, ground)
            val = abstract_state(m, state, inst)
            if not transition_consistent(action, node.hl_valuation, val):
                reason = "not direction-consistent"
            elif to_qstate(val) != expected:
                reason = "qstate differs from the HL plan"
            else:
                children.append(TreeNode(state, val, expected, node.layer + 1, ground, name, node))
                continue
            if len(transitions) < MAX_RECORDED_TRANSITIONS:
                transitions.append(_transition_record(node, ground, expected, val, reason))

        if not children:
            if blocked is None or node.layer > blocked[0].layer:
                blocked = (node, candidates)
            continue
        node.children = children
        for child in children:
            tree.add(child)
        stack.extend(reversed(children))

    if tree.depth < k:
        node, candidates = blocked if blocked is not None else (root, [])
        name = sigma_h.actions[node.layer] if node.layer < len(sigma_h.actions) else ""
        message = (f"no refinement of {name} at step {node.layer} in abstract state [{node.qstate}]"
                   + (" (tree node budget exhausted)" if budget_hit else ""))
        logger.info(f"HLPRC failed on {inst.name}: {message}")
        report = DebugReport(
            stage=DebugStage.HLPRC_NO_REFINEMENT,
            instance_id=inst.name,
            message=message,
            payload={
                "qstate": str(node.qstate),
                "expected_qstate": str(node.expected_qstate),
                "hl_action": name,
                "layer": node.layer,
                "plan": list(sigma_h.actions),
                "candidates": [str(a) for a in candidates],
                "ll_state": node.ll_state.to_pddl(),
                "transitions": transitions,
                "depth": tree.depth,
                "k": k,
            },
        )
        return RefinementError(report)
    return tree


def audit_tree(tree: RefinedTree, A: Abstraction, inst: GpInstance) -> List[str]:
    """Re-derive every edge independently of construction; returns the problems found."""
    problems = []
    for node in tree.nodes():
        if node.parent is None:
            if node.layer != 0 or node.in_action_ll is not None:
                problems.append("root must have layer 0 and no in-action")
            continue
        parent = node.parent
        edge = f"{node.in_action_ll} at layer {parent.layer}"
        if node.layer != parent.layer + 1:
            problems.append(f"{edge}: layer {node.layer} does not follow {parent.layer}")
        if not applicable(parent.ll_state, node.in_action_ll):
            problems.append(f"{edge}: not applicable")
            continue
        if apply(parent.ll_state, node.in_action_ll) != node.ll_state:
            problems.append(f"{edge}: child state is not the successor")
        if not is_refinement(node.in_action_ll, node.in_action_hl, A.mapping):
            problems.append(f"{edge}: does not refine {node.in_action_hl}")
        parent_val = abstract_state(A.mapping, parent.ll_state, inst)
        child_val = abstract_state(A.mapping, node.ll_state, inst)
        if not transition_consistent(hl_action(A, node.in_action_hl), parent_val, child_val):
            problems.append(f"{edge}: not direction-consistent with {node.in_action_hl}")
    if tree.depth > tree.k:
        problems.append(f"depth {tree.depth} exceeds k={tree.k}")
    return problems


class _Reachability:
    """bounded_goal_reachable memoized per (state, bound)."""

    def __init__(self, inst: GpInstance, budget: int):
        self.inst = inst
        self.budget = budget
        self.memo: Dict[Tuple[GroundState, int], bool] = {}

    def __call__(self, state: GroundState, bound: int) -> bool:
        key = (state, bound)
        if key not in self.memo:
            self.memo[key] = bounded_goal_reachable(self.inst, state, bound, self.budget)
        return self.memo[key]


def run_llgrc(T: RefinedTree, inst: GpInstance, k: Optional[int] = None,
              budget: int = BFS_NODE_BUDGET) -> Optional[DebugReport]:
    """Bottom-up search for a node that reaches the goal within k-i steps while
    none of its children reaches it within k-i-1. None means no diagnosis."""
    k = T.k if k is None else k
    reachable = _Reachability(inst, budget)
    for layer in range(k - 1, -1, -1):
        for node in T.layers.get(layer, []):
            if not node.children:
                continue
            if not reachable(node.ll_state, k - layer):
                continue
            if any(reachable(child.ll_state, k - layer - 1) for child in node.children):
                continue
            child = node.children[0]
            logger.info(f"LLGRC flagged {child.in_action_hl} at layer {layer} on {inst.name}")
            return DebugReport(
                stage=DebugStage.LLGRC_BAD_TRANSITION,
                instance_id=inst.name,
                message=(f"goal reachable within {k - layer} steps before {child.in_action_hl} "
                         f"but not within {k - layer - 1} after any of its refinements"),
                payload={
                    "qstate": str(node.qstate),
                    "hl_action": child.in_action_hl,
                    "next_qstate": str(child.qstate),
                    "layer": layer,
                    "ll_action": child.in_action_ll.to_pddl(),
                    "ll_actions": [c.in_action_ll.to_pddl() for c in node.children],
                    "ll_state": node.ll_state.to_pddl(),
                    "bound": k - layer,
                    "next_bound": k - layer - 1,
                },
            )
    return None


@dataclass
class PolicyRun:
    plan: Optional[Plan]
    reason: str = ""
    expanded: int = 0

    @property
    def solved(self) -> bool:
        return self.plan is not None


def execute_refined_policy(A: Abstraction, pi: Policy, inst: GpInstance, step_bound: int = EXECUTION_STEP_BOUND,
                           node_budget: int = TREE_NODE_BUDGET) -> PolicyRun:
    """Refine ``pi`` on ``inst`` by depth-first search guided by the policy.

    At each state the policy's action for the current abstract state picks the
    HL action; any applicable ground action that refines it and moves the
    features consistently is a candidate. States proven to fail are not
    revisited.
    """
    m = A.mapping
    failed: Set[GroundState] = set()
    on_path: Set[GroundState] = {inst.init}
    path: List[GroundAction] = []
    expanded = 0
    stack: List[Tuple[GroundState, List[GroundAction]]] = []
    last_reason = "no candidate"

    def candidates(state: GroundState) -> Optional[List[GroundAction]]:
        nonlocal last_reason
        val = abstract_state(m, state, inst)
        q = to_qstate(val)
        name = pi.get(q)
        if name is None:
            last_reason = f"policy undefined at [{q}]"
            return None
        action = A.qnp.action(name)
        result = []
        for ground in inst.ground_actions:
            if not applicable(state, ground) or not is_refinement(ground, name, m):
                continue
            child = apply(state, ground)
            if child in failed or child in on_path:
                continue
            if transition_consistent(action, val, abstract_state(m, child, inst)):
                result.append(ground)
        if not result:
            last_reason = f"no refinement of {name} at [{q}]"
        return result

    if holds_goal(inst.init, inst.goal):
        return PolicyRun(Plan())
    first = candidates(inst.init)
    stack.append((inst.init, list(reversed(first or []))))

    while stack:
        state, options = stack[-1]
        if not options or len(path) >= step_bound:
            if len(path) >= step_bound:
                last_reason = f"step bound {step_bound} reached"
            stack.pop()
            failed.add(state)
            on_path.discard(state)
            if path:
                path.pop()
            continue
        ground = options.pop()
        child = apply(state, ground)
        if child in failed or child in on_path:
            continue
        expanded += 1
        if expanded > node_budget:
            logger.warning(f"Policy refinement on {inst.name} hit the node budget {node_budget}")
            return PolicyRun(None, f"node budget {node_budget} exhausted", expanded)
        path.append(ground)
        if holds_goal(child, inst.goal):
            logger.info(f"Refined policy solved {inst.name} with {len(path)} steps")
            return PolicyRun(Plan(tuple(path)), "", expanded)
        on_path.add(child)
        stack.append((child, list(reversed(candidates(child) or []))))

    logger.info(f"Refined policy failed on {inst.name}: {last_reason}")
    return PolicyRun(None, last_reason, expanded)
