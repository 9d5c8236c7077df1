from itertools import product

import pytest

from absforge.app.errors import (
    ActionNotApplicable,
    ArityMismatch,
    NegativeGoal,
    PddlSyntaxError,
    UndeclaredObject,
    UndeclaredPredicate,
    UnsupportedRequirement,
)
from absforge.planning.pddl_core import (
    GroundState,
    Plan,
    applicable,
    applicable_actions,
    apply,
    bounded_goal_reachable,
    find_ground_action,
    ground_actions,
    holds_goal,
    parse_domain,
    parse_instance,
    parse_plan,
    shortest_plan,
    validate_plan,
)


def one_ball_problem(rooms, robot, ball_room, goal_room, grippers=("g1",)) -> str:
    return f"""
    (define (problem one-ball)
      (:domain gripper)
      (:objects {' '.join(rooms)} - room b1 - ball {' '.join(grippers)} - gripper)
      (:init (at-robby {robot}) (at b1 {ball_room}) {' '.join(f'(free {g})' for g in grippers)}
             (goal-at b1 {goal_room}))
      (:goal (and (at b1 {goal_room}))))
    """


def test_parse_gripper_domain(gripper_domain):
    """Test that the Gripper domain parses with its three schemata."""
    assert gripper_domain.name == "gripper"
    assert set(gripper_domain.actions) == {"move", "pick", "drop"}
    assert set(gripper_domain.predicates) == {"at-robby", "at", "free", "carry", "goal-at"}
    assert gripper_domain.predicates["carry"].arity == 2
    assert gripper_domain.static_predicates == frozenset({"goal-at"})


def test_domain_without_actions():
    dom = parse_domain("(define (domain empty) (:requirements :strips) (:predicates (p)))")
    assert dom.actions == {}


def test_unsupported_requirement():
    with pytest.raises(UnsupportedRequirement):
        parse_domain("(define (domain d) (:requirements :adl) (:predicates (p)))")


def test_undeclared_predicate_in_action():
    text = """(define (domain d) (:requirements :strips) (:predicates (p))
      (:action a :parameters () :precondition (q) :effect (p)))"""
    with pytest.raises(UndeclaredPredicate):
        parse_domain(text)


def test_arity_mismatch_in_action():
    text = """(define (domain d) (:requirements :strips) (:predicates (p ?x))
      (:action a :parameters (?x) :precondition (p ?x ?x) :effect (p ?x)))"""
    with pytest.raises(ArityMismatch):
        parse_domain(text)


def test_syntax_error_carries_position():
    with pytest.raises(PddlSyntaxError) as exc:
        parse_domain("(define (domain d)\n  (:predicates (p))", "broken.pddl")
    assert "broken.pddl" in str(exc.value)


def test_example_instance(gripper_instances):
    inst = gripper_instances["example-1"]
    for atom in [("at", "b1", "r1"), ("at", "b2", "r2"), ("at", "b4", "r4"),
                 ("free", "g1"), ("free", "g2"), ("at-robby", "r1")]:
        assert atom in inst.init
    assert ("goal-at", "b4", "r1") in inst.init
    assert inst.goal == frozenset({("at", "b1", "r3"), ("at", "b2", "r5"), ("at", "b4", "r1")})


def test_empty_goal(gripper_domain):
    text = "(define (problem p) (:domain gripper) (:objects r1 - room) (:init (at-robby r1)) (:goal (and)))"
    inst = parse_instance(text, gripper_domain)
    assert inst.goal == frozenset()
    assert holds_goal(inst.init, inst.goal)


@pytest.mark.parametrize("section", [":init", ":goal"])
def test_duplicate_problem_section(gripper_domain, section):
    body = "(at-robby r1)" if section == ":init" else "(and (at-robby r1))"
    text = ("(define (problem p) (:domain gripper) (:objects r1 - room)\n"
            "  (:init (at-robby r1)) (:goal (and (at-robby r1)))\n"
            f"  ({section} {body}))")
    with pytest.raises(PddlSyntaxError, match=f"duplicate section '{section}'") as exc:
        parse_instance(text, gripper_domain, "dup.pddl")
    assert exc.value.line == 3
    assert "dup.pddl" in str(exc.value)


def test_duplicate_domain_section():
    text = "(define (domain d) (:predicates (p)) (:predicates (q)))"
    with pytest.raises(PddlSyntaxError, match="duplicate section"):
        parse_domain(text)


def test_undeclared_object_in_init(gripper_domain):
    text = "(define (problem p) (:domain gripper) (:objects r1 - room) (:init (at b9 r1)) (:goal (and)))"
    with pytest.raises(UndeclaredObject):
        parse_instance(text, gripper_domain)


def test_negative_goal_rejected(gripper_domain):
    text = ("(define (problem p) (:domain gripper) (:objects r1 - room) (:init (at-robby r1)) "
            "(:goal (and (not (at-robby r1)))))")
    with pytest.raises(NegativeGoal):
        parse_instance(text, gripper_domain)


def test_ground_action_counts(gripper_domain):
    inst = parse_instance(one_ball_problem(["r1", "r2"], "r1", "r1", "r2", ("g1", "g2")), gripper_domain)
    by_schema = {}
    for action in ground_actions(inst):
        by_schema[action.schema] = by_schema.get(action.schema, 0) + 1
    assert by_schema == {"move": 4, "pick": 4, "drop": 4}

    three_rooms = parse_instance(one_ball_problem(["r1", "r2", "r3"], "r1", "r1", "r2"), gripper_domain)
    assert sum(1 for a in three_rooms.ground_actions if a.schema == "move") == 9


def test_schema_without_objects_of_type(gripper_domain):
    text = "(define (problem p) (:domain gripper) (:objects r1 r2 - room) (:init (at-robby r1)) (:goal (and)))"
    inst = parse_instance(text, gripper_domain)
    assert {a.schema for a in inst.ground_actions} == {"move"}


def test_applicable_on_example_state(gripper_instances):
    inst = gripper_instances["example-1"]
    assert applicable(inst.init, find_ground_action(inst, "pick", ["b1", "r1", "g1"]))
    assert not applicable(inst.init, find_ground_action(inst, "pick", ["b2", "r2", "g1"]))


def test_apply_pick(gripper_instances):
    inst = gripper_instances["example-1"]
    after = apply(inst.init, find_ground_action(inst, "pick", ["b1", "r1", "g1"]))
    assert ("at", "b1", "r1") not in after
    assert ("free", "g1") not in after
    assert ("carry", "b1", "g1") in after
    assert ("free", "g2") in after


def test_apply_inapplicable_raises(gripper_instances):
    inst = gripper_instances["example-1"]
    with pytest.raises(ActionNotApplicable):
        apply(inst.init, find_ground_action(inst, "pick", ["b2", "r2", "g1"]))


def test_move_there_and_back(gripper_instances):
    inst = gripper_instances["example-1"]
    there = apply(inst.init, find_ground_action(inst, "move", ["r1", "r2"]))
    back = apply(there, find_ground_action(inst, "move", ["r2", "r1"]))
    assert back == inst.init


def test_self_loop_move_keeps_state(gripper_instances):
    inst = gripper_instances["example-1"]
    stay = find_ground_action(inst, "move", ["r1", "r1"])
    assert not (stay.add & stay.delete)
    assert apply(inst.init, stay) == inst.init


def test_frame_property(gripper_instances):
    inst = gripper_instances["example-1"]
    for action in applicable_actions(inst, inst.init):
        after = apply(inst.init, action)
        for atom in inst.init.atoms | after.atoms:
            if atom not in action.add and atom not in action.delete:
                assert (atom in after) == (atom in inst.init)


def test_holds_goal(gripper_instances):
    inst = gripper_instances["example-1"]
    assert holds_goal(GroundState(frozenset({("at", "b1", "r3")})), {("at", "b1", "r3")})
    assert holds_goal(inst.init, set())
    assert not holds_goal(inst.init, inst.goal)


def test_validate_plan(gripper_domain):
    inst = parse_instance(one_ball_problem(["r1", "r2", "r3"], "r1", "r1", "r3"), gripper_domain)
    plan = parse_plan("(pick b1 r1 g1)\n(move r1 r3)\n(drop b1 r3 g1)", inst)
    assert validate_plan(inst, plan).valid

    swapped = Plan((plan.steps[1], plan.steps[0], plan.steps[2]))
    check = validate_plan(inst, swapped)
    assert not check.valid
    # move applies, pick then fails because the robot left r1
    assert check.failed_at == 1


def test_validate_plan_goal_missed(gripper_domain):
    inst = parse_instance(one_ball_problem(["r1", "r2", "r3"], "r1", "r1", "r3"), gripper_domain)
    plan = parse_plan("(pick b1 r1 g1)", inst)
    assert validate_plan(inst, plan) == (False, 1)


def test_validate_empty_plan_on_solved_instance(gripper_domain):
    inst = parse_instance(one_ball_problem(["r1", "r2"], "r1", "r2", "r2"), gripper_domain)
    assert validate_plan(inst, Plan()).valid


def test_bounded_reachability_examples(gripper_domain):
    inst = parse_instance(one_ball_problem(["r1", "r2"], "r1", "r1", "r2"), gripper_domain)
    assert not bounded_goal_reachable(inst, inst.init, 2)
    assert bounded_goal_reachable(inst, inst.init, 3)

    solved = parse_instance(one_ball_problem(["r1", "r2"], "r1", "r2", "r2"), gripper_domain)
    assert bounded_goal_reachable(solved, solved.init, 0)


def test_unreachable_goal_predicate():
    dom = parse_domain("""(define (domain d) (:requirements :strips) (:predicates (p) (q))
      (:action a :parameters () :precondition () :effect (p)))""")
    inst = parse_instance("(define (problem x) (:domain d) (:init) (:goal (and (q))))", dom)
    for k in range(4):
        assert not bounded_goal_reachable(inst, inst.init, k)


def _reachable_by_enumeration(inst, state, k) -> bool:
    actions = inst.ground_actions
    for length in range(k + 1):
        for sequence in product(actions, repeat=length):
            current = state
            for action in sequence:
                if not applicable(current, action):
                    break
                current = apply(current, action)
            else:
                if holds_goal(current, inst.goal):
                    return True
    return False


@pytest.mark.parametrize("robot,ball_room,goal_room", [("r1", "r1", "r2"), ("r2", "r1", "r2"), ("r1", "r2", "r1")])
def test_bounded_reachability_matches_enumeration(gripper_domain, robot, ball_room, goal_room):
    inst = parse_instance(one_ball_problem(["r1", "r2"], robot, ball_room, goal_room), gripper_domain)
    states = {inst.init}
    frontier = [inst.init]
    for _ in range(2):
        frontier = [apply(s, a) for s in frontier for a in applicable_actions(inst, s)]
        states.update(frontier)
    for state in sorted(states, key=lambda s: s.to_pddl()):
        previous = False
        for k in range(4):
            expected = _reachable_by_enumeration(inst, state, k)
            assert bounded_goal_reachable(inst, state, k) == expected
            assert expected or not previous
            previous = expected


def test_shortest_plan_is_valid(train_1):
    plan = shortest_plan(train_1)
    assert len(plan) == 4
    assert validate_plan(train_1, plan).valid
