import pytest

from absforge.app.errors import QnpFormatError
from absforge.planning.qnp_format import format_qnp, parse_num_effects, parse_qnp
from absforge.planning.qnp_model import DEC, INC


def test_parse_gripper_listing(gripper_qnp_text):
    P = parse_qnp(gripper_qnp_text)
    assert P.nums == ("N",)
    assert P.bools == ("H", "A", "G")
    assert P.action_names() == ["Move-Ball", "Pick", "Move-Goal", "Drop"]
    assert P.action("Drop").num_eff == {"N": DEC}
    assert P.init == {"N": True, "H": False, "G": False}


def test_format_then_parse_keeps_problem(gripper_qnp_text):
    P = parse_qnp(gripper_qnp_text)
    assert parse_qnp(format_qnp(P)) == P


def test_num_effect_spellings():
    assert parse_num_effects(["dec(N)", "inc", "X"]) == {"N": DEC, "X": INC}


def test_conflicting_num_effects():
    with pytest.raises(ValueError):
        parse_num_effects(["inc(N)", "dec(N)"])


def test_missing_header():
    with pytest.raises(QnpFormatError):
        parse_qnp("vars: X:num\ngoal: X=0\n")


def test_unknown_kind_reports_line():
    with pytest.raises(QnpFormatError) as exc:
        parse_qnp("# header\nvars: X:real\ninit: X>0\ngoal: X=0\n")
    assert exc.value.line == 2


def test_dec_without_precondition():
    text = "vars: X:num\ninit: X>0\ngoal: X=0\n\naction Shrink\nnum: dec(X)\n"
    with pytest.raises(QnpFormatError):
        parse_qnp(text)


def test_line_outside_action_block():
    with pytest.raises(QnpFormatError):
        parse_qnp("vars: X:num\ninit: X>0\ngoal: X=0\npre: X>0\n")
