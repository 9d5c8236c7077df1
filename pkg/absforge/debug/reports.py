"""Stage-tagged debug reports and the feedback prompts rendered from them."""

import re
from dataclasses import dataclass, field
from string import Template
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from absforge.app.errors import UnknownStage
from absforge.states.stages import DebugStage


# Payload keys every report of a stage must carry with a non-empty value
REQUIRED_PAYLOAD: Dict[DebugStage, tuple] = {
    DebugStage.DOC_INVALID: ("violations",),
    DebugStage.ASC_UNSOLVABLE: ("reason",),
    DebugStage.ASC_TIMEOUT: ("reason",),
    DebugStage.HLISC_BAD_INSTANCE: ("violated",),
    DebugStage.HLISC_ABORTED: ("qstate",),
    DebugStage.HLISC_TIMEOUT: ("qstate", "step_bound"),
    DebugStage.HLPRC_NO_REFINEMENT: ("qstate", "hl_action"),
    DebugStage.LLGRC_BAD_TRANSITION: ("qstate", "hl_action", "next_qstate"),
    DebugStage.LLGRC_TIMEOUT: ("reason", "budget"),
}


def _empty(value: Any) -> bool:
    return value is None or (isinstance(value, (str, list, dict, tuple)) and len(value) == 0)


class DebugReport(BaseModel):
    """Stage-tagged error produced by a failing check."""
    stage: DebugStage
    instance_id: Optional[str] = None
    message: str
    payload: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _payload_complete(self):
        missing = [key for key in REQUIRED_PAYLOAD[self.stage] if _empty(self.payload.get(key))]
        if missing:
            raise ValueError(f"{self.stage.value} report is missing payload fields {missing}")
        return self

    def to_json(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")

    def summary(self) -> str:
        where = f" on {self.instance_id}" if self.instance_id else ""
        return f"{self.stage.value}{where}: {self.message}"


@dataclass
class PromptContext:
    """Files that replace the notation of the feedback templates."""
    domain_text: str
    abstraction_text: str
    qnp_text: str = ""
    policy_text: str = ""
    instance_texts: Dict[str, str] = field(default_factory=dict)


_CLOSING = "Fix the QNP abstraction Q_h and the refinement mapping m. Reply with the complete revised abstraction document as a single JSON object."

_SHARED = """
PDDL domain D_l:
$domain

Current abstraction document (QNP Q_h and refinement mapping m):
$abstraction
"""

TEMPLATES: Dict[DebugStage, str] = {
    DebugStage.DOC_INVALID: (
        "The abstraction document you returned could not be used:\n$violations\n" + _SHARED + "\n" + _CLOSING
    ),
    DebugStage.ASC_UNSOLVABLE: (
        "We used a QNP solver to solve the QNP abstraction Q_h below, but no solution is returned. "
        "$reason\n\nQNP Q_h:\n$qnp\n" + _SHARED + "\n" + _CLOSING
    ),
    DebugStage.ASC_TIMEOUT: (
        "We used a QNP solver to solve the QNP abstraction Q_h below, but no solution is returned: "
        "the solver encountered an unexpected dead-end leading to a timeout. $reason\n\nQNP Q_h:\n$qnp\n"
        + _SHARED + "\n" + _CLOSING
    ),
    DebugStage.HLISC_BAD_INSTANCE: (
        "The instance Q_l below should be an instance of the QNP Q_h, but it is not: the abstraction of its "
        "initial or goal state violates these literals of Q_h:\n$violated\n\nInstance Q_l ($instance):\n$instance_text\n"
        + _SHARED + "\n" + _CLOSING
    ),
    DebugStage.HLISC_ABORTED: (
        "Policy π should solve Q_h, but fails on the HL instance of $instance: the execution aborted prematurely "
        "before reaching the goal. After the actions [$actions] the policy has no applicable action in the abstract "
        "state $qstate.\n\nPolicy π:\n$policy\n\nInstance Q_l ($instance):\n$instance_text\n"
        + _SHARED + "\n" + _CLOSING
    ),
    DebugStage.HLISC_TIMEOUT: (
        "Policy π should solve Q_h, but fails on the HL instance of $instance: the execution timed out due to "
        "getting stuck after $step_bound steps. The last abstract state was $qstate and the actions "
        "repeat [$actions].\n\nPolicy π:\n$policy\n\nInstance Q_l ($instance):\n$instance_text\n"
        + _SHARED + "\n" + _CLOSING
    ),
    DebugStage.HLPRC_NO_REFINEMENT: (
        "There is no refinement action in Q_l of the abstract action $hl_action in the abstract state $qstate "
        "(step $layer of the HL plan [$plan]). The concrete state is:\n$ll_state\n"
        "$hl_action should be an abstraction of one of actions in {$candidates}.\n"
        "Concrete successors whose abstraction did not match:\n$transitions\n\nInstance Q_l ($instance):\n$instance_text\n"
        + _SHARED + "\n" + _CLOSING
    ),
    DebugStage.LLGRC_BAD_TRANSITION: (
        "The abstract action $hl_action and state $qstate are inappropriate. From the concrete state below the "
        "goal is reachable within $bound steps, but after $ll_action, the refinement of $hl_action leading to the "
        "abstract state $next_qstate, the goal is no longer reachable within $next_bound steps.\n"
        "Concrete state:\n$ll_state\n\nInstance Q_l ($instance):\n$instance_text\n"
        + _SHARED + "\n" + _CLOSING
    ),
    DebugStage.LLGRC_TIMEOUT: (
        "The HL plan on $instance was refined, but checking which abstract transition loses goal reachability "
        "ran out of its search budget of $budget concrete states. $reason\n"
        "A plan that reaches the goal in few steps keeps this check small; review whether the refinement of each "
        "abstract action moves the concrete state closer to the goal.\n\nInstance Q_l ($instance):\n$instance_text\n"
        + _SHARED + "\n" + _CLOSING
    ),
}

UNRESOLVED = re.compile(r"\$\w+|\$\{\w+\}")


def _lines(value: Any) -> str:
    if _empty(value):
        return "(none)"
    if isinstance(value, (list, tuple)):
        return "\n".join(f"- {_inline(item)}" for item in value)
    return str(value)


def _inline(value: Any) -> str:
    if isinstance(value, dict):
        return ", ".join(f"{k}: {v}" for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return ", ".join(str(v) for v in value)
    return str(value)


def render_prompt(r: DebugReport, context: PromptContext) -> str:
    """Fill the feedback template of ``r.stage`` with serialized content."""
    template = TEMPLATES.get(r.stage)
    if template is None:
        raise UnknownStage(f"no feedback template for stage {r.stage}")
    p = r.payload
    values = {
        "domain": context.domain_text.strip(),
        "abstraction": context.abstraction_text.strip(),
        "qnp": context.qnp_text.strip() or "(not available)",
        "policy": context.policy_text.strip() or "(not available)",
        "instance": r.instance_id or "(none)",
        "instance_text": context.instance_texts.get(r.instance_id or "", "(not available)").strip(),
        "reason": str(p.get("reason", "")),
        "violations": _lines(p.get("violations")),
        "violated": _lines(p.get("violated")),
        "qstate": str(p.get("qstate", "")),
        "next_qstate": str(p.get("next_qstate", "")),
        "hl_action": str(p.get("hl_action", "")),
        "ll_action": str(p.get("ll_action", "")),
        "actions": _inline(p.get("actions", [])),
        "plan": _inline(p.get("plan", [])),
        "layer": str(p.get("layer", "")),
        "step_bound": str(p.get("step_bound", "")),
        "bound": str(p.get("bound", "")),
        "next_bound": str(p.get("next_bound", "")),
        "budget": str(p.get("budget", "")),
        "candidates": ", ".join(str(c) for c in p.get("candidates", [])),
        "transitions": _lines(p.get("transitions")),
        "ll_state": " ".join(p.get("ll_state", [])) or "(empty)",
    }
    return Template(template).substitute(values)


def has_unresolved_placeholders(text: str) -> List[str]:
    return UNRESOLVED.findall(text)
