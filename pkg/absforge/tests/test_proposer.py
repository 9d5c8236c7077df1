import pytest

from absforge.app.errors import EmptyTrainingSet, ScriptExhausted
from absforge.app.models import ProposerConfig
from absforge.proposer.base import Conversation, estimate_tokens
from absforge.proposer.file_proposer import FileProposer, make_proposer
from absforge.proposer.llm import LlmProposer
from absforge.proposer.prompts import FORMULA_GRAMMAR, render_abstraction_prompt, render_feature_prompt


def test_estimate_tokens():
    assert estimate_tokens("") == 0
    assert estimate_tokens("abcd") == 1
    assert estimate_tokens("abcde") == 2


def test_conversation_drops_oldest_messages():
    conv = Conversation(system="s" * 40, token_budget=25)
    conv.add_user("a" * 40)
    conv.add_assistant("b" * 40)
    conv.add_user("c" * 40)
    assert [m["content"][0] for m in conv.messages] == ["c"]
    assert conv.dropped == 2
    assert conv.payload()[0] == {"role": "system", "content": "s" * 40}


def test_conversation_keeps_latest_message_over_budget():
    conv = Conversation(token_budget=1)
    conv.add_user("x" * 100)
    assert len(conv.messages) == 1
    assert conv.tokens() > conv.token_budget


def test_feature_prompt_shows_domain(gripper_domain):
    prompt = render_feature_prompt(gripper_domain)
    assert "(:action pick" in prompt
    assert FORMULA_GRAMMAR in prompt


def test_abstraction_prompt(gripper_domain, train_1, train_2):
    prompt = render_abstraction_prompt(gripper_domain, [train_1, train_2], '[{"name": "N"}]')
    assert "Instance gripper-train-1:" in prompt
    assert "Instance gripper-train-2:" in prompt
    assert '"action_map"' in prompt
    assert '[{"name": "N"}]' in prompt


def test_abstraction_prompt_needs_instances(gripper_domain):
    with pytest.raises(EmptyTrainingSet):
        render_abstraction_prompt(gripper_domain, [], "")


@pytest.mark.asyncio
async def test_file_proposer_replays_in_order(tmp_path, gripper_domain, train_1):
    first, second = tmp_path / "one.md", tmp_path / "two.md"
    first.write_text("first reply", encoding="utf-8")
    second.write_text("second reply", encoding="utf-8")
    proposer = FileProposer([first, second], label="scripted")
    conv = Conversation()

    initial = await proposer.propose_initial(gripper_domain, [train_1], conv)
    assert (initial.text, initial.iteration, initial.source) == ("first reply", 1, "one.md")
    fix = await proposer.propose_fix(conv, "please fix")
    assert fix.text == "second reply"
    assert [m["role"] for m in conv.messages] == ["user", "assistant", "user", "assistant"]
    assert conv.messages[2]["content"] == "please fix"

    with pytest.raises(ScriptExhausted):
        await proposer.propose_fix(conv, "again")


def test_make_proposer():
    scripted = make_proposer(ProposerConfig(kind="file", paths=["a.md"]))
    assert isinstance(scripted, FileProposer)
    assert scripted.label == "file"
    llm = make_proposer(ProposerConfig(kind="llm", endpoint="http://localhost:1", model="m1"))
    assert isinstance(llm, LlmProposer)
    assert llm.label == "m1"


def test_llm_config_needs_endpoint_and_model():
    with pytest.raises(ValueError):
        ProposerConfig(kind="llm", endpoint=None, model="m1")
