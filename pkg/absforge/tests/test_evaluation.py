from absforge.debug.pipeline import run_asc
from absforge.harness.evaluation import Evaluation, evaluate_abstraction
from absforge.planning.pddl_core import parse_instance, parse_plan, validate_plan


UNPLACED_BALL = """
(define (problem gripper-no-goal-room)
  (:domain gripper)
  (:objects r1 r2 - room b1 - ball g1 - gripper)
  (:init (at-robby r1) (at b1 r1) (free g1))
  (:goal (and (at b1 r2))))
"""


def test_reference_solves_every_evaluation_instance(reference_abstraction, eval_instances):
    policy = run_asc(reference_abstraction)
    result = evaluate_abstraction(reference_abstraction, policy, eval_instances)
    assert len(result.evaluations) == 10
    assert result.coverage == 1.0
    by_name = {inst.name: inst for inst in eval_instances}
    for evaluation in result.evaluations:
        inst = by_name[evaluation.instance]
        assert validate_plan(inst, parse_plan("\n".join(evaluation.plan), inst)).valid


def test_empty_evaluation_set(reference_abstraction):
    policy = run_asc(reference_abstraction)
    result = evaluate_abstraction(reference_abstraction, policy, [])
    assert result.coverage is None
    assert result.solved == 0


def test_unsolved_instance_counts_against_coverage(reference_abstraction, gripper_domain, eval_instances):
    policy = run_asc(reference_abstraction)
    broken = parse_instance(UNPLACED_BALL, gripper_domain)
    result = evaluate_abstraction(reference_abstraction, policy, [broken] + eval_instances[:3])
    assert result.coverage == 0.75
    failed = result.evaluations[0]
    assert not failed.solved
    assert failed.reason.startswith("policy undefined")


def test_coverage_fraction():
    assert Evaluation().coverage is None
