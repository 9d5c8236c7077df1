"""QNP solver: AND/OR search over qstate policies with a Sieve termination test.

A policy solves a QNP when, from every initial qstate, every reachable
non-goal qstate is mapped to an applicable action, the goal stays reachable
from every reachable qstate, and the policy graph passes the Sieve (so every
fair trajectory terminates).
"""

import logging
import random
import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Set, Tuple

from absforge.config.config import SOLVER_NODE_BUDGET, SOLVER_TIME_LIMIT
from absforge.planning.qnp_model import (
    DEC,
    INC,
    Policy,
    QnpAction,
    QnpProblem,
    QState,
    applicable_q,
    initial_qstates,
    is_goal_q,
    successors_q,
)
from absforge.planning.sccs import strongly_connected_components


logger = logging.getLogger(__name__)


class SolveStatus(str, Enum):
    SOLVED = "SOLVED"
    UNSOLVABLE = "UNSOLVABLE"
    RESOURCE_LIMIT = "RESOURCE_LIMIT"


@dataclass
class SolveOutcome:
    status: SolveStatus
    policy: Optional[Policy] = None
    expanded: int = 0
    message: str = ""

    @property
    def solved(self) -> bool:
        return self.status == SolveStatus.SOLVED


@dataclass(frozen=True)
class Edge:
    src: QState
    action: str
    dst: QState


@dataclass
class PolicyGraph:
    """Qstates reachable under a policy and the edges its actions induce."""
    nodes: List[QState] = field(default_factory=list)
    edges: List[Edge] = field(default_factory=list)
    effects: Dict[str, Dict[str, str]] = field(default_factory=dict)
    goals: Set[QState] = field(default_factory=set)
    unmapped: List[QState] = field(default_factory=list)

    def adjacency(self, edges: Optional[List[Edge]] = None) -> Dict[QState, List[QState]]:
        result: Dict[QState, List[QState]] = {node: [] for node in self.nodes}
        for edge in self.edges if edges is None else edges:
            if edge.dst not in result[edge.src]:
                result[edge.src].append(edge.dst)
        return result


def build_policy_graph(pi: Policy, P: QnpProblem) -> PolicyGraph:
    """Expand ``pi`` breadth-first from every initial qstate; goal qstates are terminal."""
    graph = PolicyGraph(effects={a.name: dict(a.num_eff) for a in P.actions})
    seen: Set[QState] = set()
    queue = deque()
    for q in initial_qstates(P):
        if q not in seen:
            seen.add(q)
            queue.append(q)
    while queue:
        q = queue.popleft()
        graph.nodes.append(q)
        if is_goal_q(q, P):
            graph.goals.add(q)
            continue
        name = pi.get(q)
        if name is None or name not in graph.effects or not applicable_q(q, P.action(name)):
            graph.unmapped.append(q)
            continue
        for succ in successors_q(q, P.action(name)):
            graph.edges.append(Edge(q, name, succ))
            if succ not in seen:
                seen.add(succ)
                queue.append(succ)
    return graph


def _has_cycle(graph: PolicyGraph, edges: List[Edge]) -> bool:
    if any(edge.src == edge.dst for edge in edges):
        return True
    return any(len(c) > 1 for c in strongly_connected_components(graph.adjacency(edges)))


def sieve_terminates(g: PolicyGraph, rng: Optional[random.Random] = None) -> bool:
    """Sieve: repeatedly drop, inside an SCC, the edges that decrement a
    variable no edge of that SCC increments. Terminating iff no cycle survives.

    ``rng`` shuffles the order in which SCCs and variables are picked.
    """
    edges = list(g.edges)
    while True:
        components = [c for c in strongly_connected_components(g.adjacency(edges))]
        if rng is not None:
            rng.shuffle(components)
        removed = False
        for component in components:
            members = set(component)
            inner = [e for e in edges if e.src in members and e.dst in members]
            if not inner:
                continue
            decs = sorted({v for e in inner for v, eff in g.effects[e.action].items() if eff == DEC})
            incs = {v for e in inner for v, eff in g.effects[e.action].items() if eff == INC}
            candidates = [v for v in decs if v not in incs]
            if not candidates:
                continue
            var = rng.choice(candidates) if rng is not None else candidates[0]
            doomed = {e for e in inner if g.effects[e.action].get(var) == DEC}
            edges = [e for e in edges if e not in doomed]
            removed = True
            break
        if not removed:
            return not _has_cycle(g, edges)


def _goal_reachable_everywhere(graph: PolicyGraph) -> bool:
    backward: Dict[QState, List[QState]] = {node: [] for node in graph.nodes}
    for edge in graph.edges:
        backward[edge.dst].append(edge.src)
    reached = set(graph.goals)
    queue = deque(graph.goals)
    while queue:
        q = queue.popleft()
        for prev in backward[q]:
            if prev not in reached:
                reached.add(prev)
                queue.append(prev)
    return len(reached) == len(graph.nodes)


def verify_policy(pi: Policy, P: QnpProblem) -> bool:
    graph = build_policy_graph(pi, P)
    if graph.unmapped:
        logger.debug(f"Policy undefined or inapplicable on {len(graph.unmapped)} reachable qstates")
        return False
    if not _goal_reachable_everywhere(graph):
        logger.debug("Policy graph has qstates from which the goal is unreachable")
        return False
    return sieve_terminates(graph)


class _BudgetExhausted(Exception):
    pass


class QnpSolver:
    """Depth-first search over partial policies on the strong-cyclic region.

    The region is the greatest set of qstates from which the goal can be
    reached using only actions whose every outcome stays in the set; a
    solution can only use those qstates and actions.
    """

    def __init__(self, P: QnpProblem, node_budget: int = SOLVER_NODE_BUDGET,
                 time_limit: float = SOLVER_TIME_LIMIT):
        self.P = P
        self.node_budget = node_budget
        self.time_limit = time_limit
        self.expanded = 0
        self.deadline = 0.0
        self.transitions: Dict[QState, Dict[str, Tuple[QState, ...]]] = {}
        self.order: Dict[QState, List[str]] = {}
        self.initial: List[QState] = []

    def _tick(self) -> None:
        self.expanded += 1
        if self.expanded > self.node_budget:
            raise _BudgetExhausted(f"node budget {self.node_budget} exhausted")
        if time.monotonic() > self.deadline:
            raise _BudgetExhausted(f"time limit {self.time_limit}s exceeded")

    def _explore(self) -> None:
        seen = set(self.initial)
        queue = deque(self.initial)
        while queue:
            q = queue.popleft()
            self._tick()
            self.transitions[q] = {}
            if is_goal_q(q, self.P):
                continue
            for action in self.P.actions:
                if not applicable_q(q, action):
                    continue
                succs = successors_q(q, action)
                self.transitions[q][action.name] = succs
                for succ in succs:
                    if succ not in seen:
                        seen.add(succ)
                        queue.append(succ)

    def _strong_cyclic_region(self) -> Dict[QState, List[str]]:
        alive = set(self.transitions)
        allowed = {q: list(acts) for q, acts in self.transitions.items()}
        while True:
            for q in alive:
                allowed[q] = [a for a in allowed[q] if all(s in alive for s in self.transitions[q][a])]
            reach = {q for q in alive if is_goal_q(q, self.P)}
            grew = True
            while grew:
                grew = False
                for q in alive - reach:
                    if any(any(s in reach for s in self.transitions[q][a]) for a in allowed[q]):
                        reach.add(q)
                        grew = True
            if reach == alive:
                return {q: allowed[q] for q in alive}
            alive = reach

    def _order_actions(self, region: Dict[QState, List[str]]) -> None:
        inf = float("inf")
        dist = {q: (0 if is_goal_q(q, self.P) else inf) for q in region}
        changed = True
        while changed:
            changed = False
            for q, acts in region.items():
                for a in acts:
                    best = min(dist[s] for s in self.transitions[q][a]) + 1
                    if best < dist[q]:
                        dist[q] = best
                        changed = True
        for q, acts in region.items():
            self.order[q] = sorted(acts, key=lambda a: (max(dist[s] for s in self.transitions[q][a]), a))

    def _first_open(self, rules: Dict[QState, str]) -> Optional[QState]:
        seen = set(self.initial)
        queue = deque(self.initial)
        while queue:
            q = queue.popleft()
            if is_goal_q(q, self.P):
                continue
            name = rules.get(q)
            if name is None:
                return q
            for succ in self.transitions[q][name]:
                if succ not in seen:
                    seen.add(succ)
                    queue.append(succ)
        return None

    def _search(self, rules: Dict[QState, str]) -> Optional[Dict[QState, str]]:
        q = self._first_open(rules)
        if q is None:
            return rules if verify_policy(Policy(dict(rules)), self.P) else None
        for name in self.order.get(q, []):
            self._tick()
            rules[q] = name
            found = self._search(rules)
            if found is not None:
                return found
            del rules[q]
        return None

    def solve(self) -> SolveOutcome:
        self.deadline = time.monotonic() + self.time_limit
        self.initial = initial_qstates(self.P)
        try:
            self._explore()
            region = self._strong_cyclic_region()
            dead = [q for q in self.initial if q not in region]
            if dead:
                logger.info(f"QNP unsolvable: goal unreachable from initial qstate [{dead[0]}]")
                return SolveOutcome(SolveStatus.UNSOLVABLE, expanded=self.expanded,
                                    message=f"goal unreachable from initial qstate [{dead[0]}]")
            self._order_actions(region)
            rules = self._search({})
        except _BudgetExhausted as e:
            logger.warning(f"QNP solver stopped after {self.expanded} nodes: {e}")
            return SolveOutcome(SolveStatus.RESOURCE_LIMIT, expanded=self.expanded, message=str(e))
        if rules is None:
            logger.info(f"QNP unsolvable: no terminating policy among {self.expanded} candidates")
            return SolveOutcome(SolveStatus.UNSOLVABLE, expanded=self.expanded,
                                message="every candidate policy dead-ends or fails the termination test")
        policy = Policy(dict(rules))
        logger.info(f"QNP solved with a {len(policy)}-rule policy after {self.expanded} nodes")
        return SolveOutcome(SolveStatus.SOLVED, policy=policy, expanded=self.expanded)


def solve(P: QnpProblem, node_budget: int = SOLVER_NODE_BUDGET,
          time_limit: float = SOLVER_TIME_LIMIT) -> SolveOutcome:
    return QnpSolver(P, node_budget, time_limit).solve()


# Execution

class ExecutionStatus(str, Enum):
    GOAL = "GOAL"
    ABORTED = "ABORTED"
    STEP_LIMIT = "STEP_LIMIT"


@dataclass
class Execution:
    status: ExecutionStatus
    trace: List[Tuple[QState, str]]
    final: QState

    @property
    def actions(self) -> List[str]:
        return [name for _, name in self.trace]

    @property
    def qstates(self) -> List[QState]:
        """Visited qstates, including the final one."""
        return [q for q, _ in self.trace] + [self.final]


BranchOracle = Callable[[QState, QnpAction], QState]


def execute_policy_q(pi: Policy, s0: QState, P: QnpProblem, branch_oracle: BranchOracle,
                     step_bound: int) -> Execution:
    """Follow ``pi`` from ``s0``; ``branch_oracle`` picks the outcome of each step."""
    trace: List[Tuple[QState, str]] = []
    q = s0
    while not is_goal_q(q, P):
        if len(trace) >= step_bound:
            return Execution(ExecutionStatus.STEP_LIMIT, trace, q)
        name = pi.get(q)
        if name is None or not applicable_q(q, P.action(name)):
            return Execution(ExecutionStatus.ABORTED, trace, q)
        action = P.action(name)
        nxt = branch_oracle(q, action)
        if nxt not in successors_q(q, action):
            raise ValueError(f"branch oracle returned [{nxt}], not a successor of [{q}] under {name}")
        trace.append((q, name))
        q = nxt
    return Execution(ExecutionStatus.GOAL, trace, q)
