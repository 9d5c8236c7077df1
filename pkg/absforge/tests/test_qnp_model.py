import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from absforge.app.errors import NotApplicable
from absforge.planning.qnp_model import (
    DEC,
    INC,
    Policy,
    QnpAction,
    QnpProblem,
    applicable_q,
    apply_quantitative,
    initial_qstates,
    is_goal_q,
    parse_literal,
    parse_literals,
    successors_q,
)


@pytest.fixture
def problem() -> QnpProblem:
    return QnpProblem(
        bools=("H",),
        nums=("N",),
        actions=(
            QnpAction(name="Pick", pre={"N": True, "H": False}, bool_eff={"H": True}),
            QnpAction(name="Drop", pre={"N": True, "H": True}, bool_eff={"H": False}, num_eff={"N": DEC}),
            QnpAction(name="Spill", pre={"H": False}, num_eff={"N": INC}),
        ),
        init={"N": True},
        goal={"N": False},
    )


@pytest.mark.parametrize("text,expected", [
    ("N>0", ("N", True, True)),
    ("N = 0", ("N", False, True)),
    ("H", ("H", True, False)),
    ("!H", ("H", False, False)),
    ("¬H", ("H", False, False)),
    ("not H", ("H", False, False)),
    ("Move-Ball", ("Move-Ball", True, False)),
])
def test_parse_literal(text, expected):
    assert parse_literal(text) == expected


@pytest.mark.parametrize("text", ["", "N>1x", "1N", "(H)"])
def test_parse_literal_rejects(text):
    with pytest.raises(ValueError):
        parse_literal(text)


def test_inconsistent_literals():
    with pytest.raises(ValueError):
        parse_literals(["H", "!H"])


def test_dec_requires_positive_precondition():
    with pytest.raises(ValidationError):
        QnpAction(name="Bad", pre={}, num_eff={"N": DEC})


def test_undeclared_variable_rejected():
    with pytest.raises(ValidationError):
        QnpProblem(bools=("H",), init={"X": True})


def test_variable_declared_twice():
    with pytest.raises(ValidationError):
        QnpProblem(bools=("X",), nums=("X",))


def test_initial_qstates_cover_unconstrained_vars(problem):
    initial = initial_qstates(problem)
    assert len(initial) == 2
    assert {q["H"] for q in initial} == {True, False}
    assert all(q["N"] for q in initial)


def test_successors_of_dec_branch(problem):
    q = problem.make_qstate({"N": True, "H": True})
    succs = successors_q(q, problem.action("Drop"))
    assert [str(s) for s in succs] == ["N>0 !H", "N=0 !H"]
    assert is_goal_q(succs[1], problem)


def test_successors_of_inc_is_positive(problem):
    q = problem.make_qstate({"N": False, "H": False})
    assert [str(s) for s in successors_q(q, problem.action("Spill"))] == ["N>0 !H"]


def test_successors_of_inapplicable_action(problem):
    q = problem.make_qstate({"N": False, "H": False})
    with pytest.raises(NotApplicable):
        successors_q(q, problem.action("Pick"))


def test_make_qstate_requires_total_assignment(problem):
    with pytest.raises(ValueError):
        problem.make_qstate({"N": True})


def test_all_qstates(problem):
    assert len(problem.all_qstates()) == 4


def test_apply_quantitative(problem):
    bools, counts = apply_quantitative(problem.action("Drop"), {"H": True}, {"N": 3})
    assert bools == {"H": False}
    assert counts == {"N": 2}
    _, counts = apply_quantitative(problem.action("Drop"), {"H": True}, {"N": 1}, {"N": 5})
    assert counts == {"N": 0}
    with pytest.raises(ValueError):
        apply_quantitative(problem.action("Drop"), {"H": True}, {"N": 3}, {"N": 0})


def test_policy_listing(problem):
    pi = Policy({
        problem.make_qstate({"N": True, "H": False}): "Pick",
        problem.make_qstate({"N": True, "H": True}): "Drop",
    })
    assert pi.lines() == ["N>0 H => Drop", "N>0 !H => Pick"]
    assert pi.to_json()[0] == {"qstate": "N>0 H", "action": "Drop"}


TWO_BY_TWO = QnpProblem(bools=("H", "P"), nums=("N", "M"))
maybe_bool = st.sampled_from([None, True, False])


@st.composite
def actions(draw) -> QnpAction:
    pre, bool_eff, num_eff = {}, {}, {}
    for var in TWO_BY_TWO.bools + TWO_BY_TWO.nums:
        value = draw(maybe_bool)
        if value is not None:
            pre[var] = value
    for var in TWO_BY_TWO.bools:
        value = draw(maybe_bool)
        if value is not None:
            bool_eff[var] = value
    for var in TWO_BY_TWO.nums:
        effect = draw(st.sampled_from([None, INC, DEC]))
        if effect is not None:
            num_eff[var] = effect
            if effect == DEC:
                pre[var] = True
    return QnpAction(name="Step", pre=pre, bool_eff=bool_eff, num_eff=num_eff)


@settings(max_examples=300, deadline=None)
@given(
    actions(),
    st.fixed_dictionaries({"H": st.booleans(), "P": st.booleans()}),
    st.fixed_dictionaries({"N": st.integers(0, 4), "M": st.integers(0, 4)}),
    st.fixed_dictionaries({"N": st.integers(1, 3), "M": st.integers(1, 3)}),
)
def test_quantitative_step_projects_to_a_successor(action, bools, counts, amounts):
    q = TWO_BY_TWO.make_qstate({**bools, **{var: count > 0 for var, count in counts.items()}})
    assume(applicable_q(q, action))
    new_bools, new_counts = apply_quantitative(action, bools, counts, amounts)
    projected = TWO_BY_TWO.make_qstate({**new_bools, **{var: count > 0 for var, count in new_counts.items()}})
    assert projected in successors_q(q, action)
