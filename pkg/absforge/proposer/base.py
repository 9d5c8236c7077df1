import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from absforge.config.config import CONVERSATION_TOKEN_BUDGET
from absforge.planning.pddl_core import GpDomain, GpInstance


logger = logging.getLogger(__name__)


def estimate_tokens(text: str) -> int:
    """Rough token count: four characters per token."""
    return (len(text) + 3) // 4


@dataclass
class Conversation:
    """Chat history sent to a proposer, trimmed oldest-first to a token budget.

    The system message and the latest message are never dropped.
    """
    system: str = ""
    messages: List[Dict[str, str]] = field(default_factory=list)
    token_budget: int = CONVERSATION_TOKEN_BUDGET
    dropped: int = 0

    def add(self, role: str, content: str) -> None:
        self.messages.append({"role": role, "content": content})
        self._truncate()

    def add_user(self, content: str) -> None:
        self.add("user", content)

    def add_assistant(self, content: str) -> None:
        self.add("assistant", content)

    def tokens(self) -> int:
        return estimate_tokens(self.system) + sum(estimate_tokens(m["content"]) for m in self.messages)

    def _truncate(self) -> None:
        while len(self.messages) > 1 and self.tokens() > self.token_budget:
            self.messages.pop(0)
            self.dropped += 1
        if self.dropped:
            logger.debug(f"Conversation trimmed, {self.dropped} message(s) dropped so far")

    def payload(self) -> List[Dict[str, str]]:
        """Messages in chat-completions form."""
        result = [{"role": "system", "content": self.system}] if self.system else []
        return result + [dict(m) for m in self.messages]


@dataclass
class Proposal:
    """Raw reply text of one proposer call."""
    text: str
    iteration: int
    source: Optional[str] = None


class Proposer(ABC):
    """Produces abstraction documents: one initial proposal, then fixes.

    Both calls append the prompt and the reply to ``conv``.
    """

    label: str = "proposer"

    @abstractmethod
    async def propose_initial(self, dom: GpDomain, insts: Sequence[GpInstance], conv: Conversation) -> Proposal:
        ...

    @abstractmethod
    async def propose_fix(self, conv: Conversation, prompt: str) -> Proposal:
        ...

    async def close(self) -> None:
        return None
