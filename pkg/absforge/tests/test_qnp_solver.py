import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from absforge.planning.qnp_format import parse_qnp
from absforge.planning.qnp_model import DEC, INC, Policy, QnpAction, QnpProblem, applicable_q, is_goal_q
from absforge.planning.qnp_solver import (
    ExecutionStatus,
    SolveStatus,
    build_policy_graph,
    execute_policy_q,
    sieve_terminates,
    solve,
    verify_policy,
)
from absforge.planning.sccs import strongly_connected_components


@pytest.fixture
def load_qnp(qnp_text):
    def load(name: str) -> QnpProblem:
        return parse_qnp(qnp_text(name))
    return load


def test_gripper_qnp_is_solved(load_qnp):
    P = load_qnp("gripper")
    outcome = solve(P)
    assert outcome.status == SolveStatus.SOLVED
    assert verify_policy(outcome.policy, P)
    start = P.make_qstate({"N": True, "H": False, "A": False, "G": False})
    assert outcome.policy.get(start) == "Move-Ball"


def test_inc_dec_cycle_is_unsolvable(load_qnp):
    outcome = solve(load_qnp("inc_dec_cycle"))
    assert outcome.status == SolveStatus.UNSOLVABLE
    assert outcome.policy is None


def test_pure_dec_is_solved(load_qnp):
    P = load_qnp("pure_dec")
    outcome = solve(P)
    assert outcome.solved
    assert outcome.policy.lines() == ["X>0 => Shrink"]


def test_zero_budget_is_resource_limit(load_qnp):
    outcome = solve(load_qnp("gripper"), node_budget=0)
    assert outcome.status == SolveStatus.RESOURCE_LIMIT


def test_goal_in_initial_state_needs_no_rules():
    P = QnpProblem(nums=("X",), init={"X": False}, goal={"X": False})
    outcome = solve(P)
    assert outcome.solved
    assert len(outcome.policy) == 0


def test_unreachable_goal():
    P = QnpProblem(bools=("P",), actions=(QnpAction(name="Noop", pre={"P": False}),),
                   init={"P": False}, goal={"P": True})
    assert solve(P).status == SolveStatus.UNSOLVABLE


def test_sccs_reverse_topological():
    components = strongly_connected_components({"a": ["b"], "b": ["a", "c"], "c": []})
    assert [sorted(c) for c in components] == [["c"], ["a", "b"]]


def test_sieve_removes_decrement_loop(load_qnp):
    P = load_qnp("pure_dec")
    pi = solve(P).policy
    graph = build_policy_graph(pi, P)
    assert any(e.src == e.dst for e in graph.edges)
    assert sieve_terminates(graph)


def test_sieve_keeps_inc_dec_loop(load_qnp):
    P = load_qnp("inc_dec_cycle")
    pi = Policy({
        P.make_qstate({"X": True, "P": False}): "Take",
        P.make_qstate({"X": True, "P": True}): "Put",
        P.make_qstate({"X": False, "P": True}): "Put",
    })
    assert not sieve_terminates(build_policy_graph(pi, P))


@pytest.mark.parametrize("name", ["gripper", "pure_dec", "inc_dec_cycle"])
def test_sieve_does_not_depend_on_order(load_qnp, name):
    P = load_qnp(name)
    rules = {}
    for q in P.all_qstates():
        applicable = [a.name for a in P.actions if applicable_q(q, a)]
        if applicable and not is_goal_q(q, P):
            rules[q] = applicable[0]
    graph = build_policy_graph(Policy(rules), P)
    expected = sieve_terminates(graph)
    for seed in range(20):
        assert sieve_terminates(graph, random.Random(seed)) == expected


def test_execute_policy_with_oracle(load_qnp):
    P = load_qnp("pure_dec")
    pi = solve(P).policy
    remaining = {"X": 3}

    def oracle(q, action):
        remaining["X"] -= 1
        return q.updated({"X": remaining["X"] > 0})

    start = P.make_qstate({"X": True})
    run = execute_policy_q(pi, start, P, oracle, step_bound=10)
    assert run.status == ExecutionStatus.GOAL
    assert run.actions == ["Shrink"] * 3
    assert len(run.qstates) == 4

    remaining["X"] = 50
    assert execute_policy_q(pi, start, P, oracle, step_bound=5).status == ExecutionStatus.STEP_LIMIT
    assert execute_policy_q(Policy(), start, P, oracle, step_bound=5).status == ExecutionStatus.ABORTED


# Exhaustive oracle on small problems: every closed policy is expanded into its
# qualitative transitions and searched for a loop that can run forever.

def _outcomes(P: QnpProblem, q, a: QnpAction):
    values = dict(q.values)
    values.update(a.bool_eff)
    branches = [values]
    for var, effect in a.num_eff.items():
        options = (True,) if effect == INC else (True, False)
        branches = [{**b, var: option} for b in branches for option in options]
    return {P.make_qstate(b) for b in branches}


def _holds(q, literals) -> bool:
    return all(q.values[var] == value for var, value in literals.items())


def _starts(P: QnpProblem):
    return sorted((q for q in P.all_qstates() if _holds(q, P.init)), key=str)


def _expand(P: QnpProblem, rules):
    """Edges of ``rules`` from the initial qstates and the first open qstate without a rule."""
    edges, seen = [], set(_starts(P))
    stack = list(_starts(P))
    missing = None
    while stack:
        q = stack.pop()
        if _holds(q, P.goal):
            continue
        if q not in rules:
            if missing is None or str(q) < str(missing):
                missing = q
            continue
        for succ in _outcomes(P, q, P.action(rules[q])):
            edges.append((q, rules[q], succ))
            if succ not in seen:
                seen.add(succ)
                stack.append(succ)
    return seen, edges, missing


def _closed_policies(P: QnpProblem, rules=None):
    rules = {} if rules is None else rules
    _, _, missing = _expand(P, rules)
    if missing is None:
        yield dict(rules)
        return
    for a in P.actions:
        if _holds(missing, a.pre):
            rules[missing] = a.name
            yield from _closed_policies(P, rules)
            del rules[missing]


def _fair(P: QnpProblem, used) -> bool:
    effects = [eff for _, name, _ in used for eff in P.action(name).num_eff.items()]
    decs = {var for var, eff in effects if eff == DEC}
    incs = {var for var, eff in effects if eff == INC}
    return decs <= incs


def _runs_forever(P: QnpProblem, edges) -> bool:
    """Some trajectory returns to its start after using edges whose decrements are all matched."""
    out = {}
    for edge in edges:
        out.setdefault(edge[0], []).append(edge)
    for start in out:
        seen = set()
        frontier = [(start, frozenset())]
        while frontier:
            node, used = frontier.pop()
            for edge in out.get(node, []):
                now = used | {edge}
                if edge[2] == start and _fair(P, now):
                    return True
                if (edge[2], now) not in seen:
                    seen.add((edge[2], now))
                    frontier.append((edge[2], now))
    return False


def _goal_reachable_from_all(P: QnpProblem, nodes, edges) -> bool:
    forward = {}
    for src, _, dst in edges:
        forward.setdefault(src, set()).add(dst)
    for node in nodes:
        reached, stack = {node}, [node]
        while stack:
            q = stack.pop()
            for nxt in forward.get(q, ()):
                if nxt not in reached:
                    reached.add(nxt)
                    stack.append(nxt)
        if not any(_holds(q, P.goal) for q in reached):
            return False
    return True


def _solves(P: QnpProblem, rules) -> bool:
    nodes, edges, missing = _expand(P, rules)
    return missing is None and _goal_reachable_from_all(P, nodes, edges) and not _runs_forever(P, edges)


def _solvable_by_enumeration(P: QnpProblem) -> bool:
    return any(_solves(P, rules) for rules in _closed_policies(P))


maybe_bool = st.sampled_from([None, True, False])
maybe_num_effect = st.sampled_from([None, INC, DEC])


@st.composite
def small_problems(draw) -> QnpProblem:
    nums = ("X",) if draw(st.booleans()) else ("X", "Y")
    bools = ("P", "Q")[: draw(st.integers(min_value=1, max_value=3 - len(nums)))]
    variables = nums + bools

    def literals(names):
        picked = {}
        for var in names:
            value = draw(maybe_bool)
            if value is not None:
                picked[var] = value
        return picked

    actions = []
    for index in range(draw(st.integers(min_value=1, max_value=3))):
        pre = literals(variables)
        num_eff = {}
        for var in nums:
            effect = draw(maybe_num_effect)
            if effect is not None:
                num_eff[var] = effect
                if effect == DEC:
                    pre[var] = True
        actions.append(QnpAction(name=f"a{index}", pre=pre, bool_eff=literals(bools), num_eff=num_eff))
    return QnpProblem(bools=bools, nums=nums, actions=tuple(actions),
                      init=literals(variables), goal=literals(variables))


@settings(max_examples=150, deadline=None)
@given(small_problems())
def test_solver_agrees_with_enumeration(P):
    outcome = solve(P)
    assert outcome.status != SolveStatus.RESOURCE_LIMIT
    assert outcome.solved == _solvable_by_enumeration(P)
    if outcome.solved:
        assert _solves(P, outcome.policy.rules)
        assert verify_policy(outcome.policy, P)


def _two_counters(back_edge: dict, goal: dict) -> QnpProblem:
    return QnpProblem(
        nums=("X", "Y"),
        actions=(
            QnpAction(name="MoveXY", pre={"X": True}, num_eff={"X": DEC, "Y": INC}),
            QnpAction(name="DrainY", pre={"X": False, "Y": True}, num_eff=back_edge),
        ),
        init={"X": True},
        goal=goal,
    )


def test_counter_transfer_terminates():
    P = _two_counters({"Y": DEC}, {"X": False, "Y": False})
    outcome = solve(P)
    assert outcome.solved
    assert _solves(P, outcome.policy.rules)


def test_counter_swap_loops_forever():
    P = _two_counters({"Y": DEC, "X": INC}, {"Y": False})
    rules = next(_closed_policies(P))
    nodes, edges, _ = _expand(P, rules)
    assert _goal_reachable_from_all(P, nodes, edges)
    assert _runs_forever(P, edges)
    assert not _solvable_by_enumeration(P)
    assert solve(P).status == SolveStatus.UNSOLVABLE
