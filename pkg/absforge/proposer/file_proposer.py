import logging
from pathlib import Path
from typing import List, Sequence

import aiofiles

from absforge.app.errors import ScriptExhausted
from absforge.app.models import ProposerConfig
from absforge.planning.pddl_core import GpDomain, GpInstance
from absforge.proposer.base import Conversation, Proposal, Proposer
from absforge.proposer.llm import LlmProposer
from absforge.proposer.prompts import SYSTEM_PROMPT, render_abstraction_prompt


logger = logging.getLogger(__name__)


class FileProposer(Proposer):
    """Replays scripted replies: the i-th call returns the i-th file."""

    def __init__(self, paths: Sequence[str], label: str = "file"):
        self.paths: List[str] = [str(p) for p in paths]
        self.label = label
        self.calls = 0

    async def _next(self, conv: Conversation, prompt: str) -> Proposal:
        conv.add_user(prompt)
        if self.calls >= len(self.paths):
            raise ScriptExhausted(f"scripted proposer has {len(self.paths)} replies, call {self.calls} requested")
        path = self.paths[self.calls]
        async with aiofiles.open(path, "r", encoding="utf-8") as f:
            text = await f.read()
        self.calls += 1
        conv.add_assistant(text)
        logger.info(f"Scripted reply {self.calls}/{len(self.paths)} from {Path(path).name}")
        return Proposal(text=text, iteration=self.calls, source=Path(path).name)

    async def propose_initial(self, dom: GpDomain, insts: Sequence[GpInstance], conv: Conversation) -> Proposal:
        if not conv.system:
            conv.system = SYSTEM_PROMPT
        return await self._next(conv, render_abstraction_prompt(dom, insts, "(scripted)"))

    async def propose_fix(self, conv: Conversation, prompt: str) -> Proposal:
        return await self._next(conv, prompt)


def make_proposer(cfg: ProposerConfig) -> Proposer:
    if cfg.kind == "file":
        return FileProposer(cfg.paths, cfg.display_label())
    return LlmProposer(cfg)
