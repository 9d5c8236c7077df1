"""Chat-completions client and the LLM-backed proposer."""

import asyncio
import logging
import os
from typing import Any, Dict, Optional, Sequence

import aiohttp

from absforge.app.errors import AuthError, LlmTimeout, ProtocolError
from absforge.app.models import ProposerConfig
from absforge.planning.pddl_core import GpDomain, GpInstance
from absforge.proposer.base import Conversation, Proposal, Proposer
from absforge.proposer.prompts import SYSTEM_PROMPT, render_abstraction_prompt, render_feature_prompt


logger = logging.getLogger(__name__)

EXCERPT_CHARS = 300


def _api_key(cfg: ProposerConfig) -> str:
    key = os.environ.get(cfg.api_key_env)
    if not key:
        raise AuthError(f"environment variable {cfg.api_key_env} is not set")
    return key


def _completion_text(body: Dict[str, Any]) -> str:
    try:
        content = body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise ProtocolError(200, "response has no choices[0].message.content")
    if not isinstance(content, str) or not content:
        raise ProtocolError(200, "empty completion")
    return content


async def llm_chat(cfg: ProposerConfig, conv: Conversation,
                   session: Optional[aiohttp.ClientSession] = None) -> str:
    """POST the conversation to ``{endpoint}/chat/completions`` and return the reply text.

    429, 5xx, connection errors and timeouts are retried up to ``cfg.max_retries``
    times with a ``backoff_base * 2**n`` second delay. 401/403 fail at once.
    """
    if cfg.kind != "llm" or not cfg.endpoint or not cfg.model:
        raise ValueError("llm_chat needs an llm proposer config with endpoint and model")
    headers = {"Authorization": f"Bearer {_api_key(cfg)}", "Content-Type": "application/json"}
    payload = {"model": cfg.model, "messages": conv.payload(), "stream": False}
    url = f"{cfg.endpoint.rstrip('/')}/chat/completions"

    own_session = session is None
    if own_session:
        session = aiohttp.ClientSession(timeout=aiohttp.ClientTimeout(total=cfg.timeout))
    try:
        attempt = 0
        while True:
            retry_reason = None
            try:
                logger.info(f"Sending chat request to {url} (model {cfg.model}, attempt {attempt + 1})")
                async with session.post(url, json=payload, headers=headers,
                                        timeout=aiohttp.ClientTimeout(total=cfg.timeout)) as response:
                    if response.status in (401, 403):
                        raise AuthError(f"endpoint rejected the credentials (HTTP {response.status})")
                    if response.status == 429 or response.status >= 500:
                        excerpt = (await response.text())[:EXCERPT_CHARS]
                        if attempt >= cfg.max_retries:
                            raise ProtocolError(response.status, excerpt)
                        retry_reason = f"HTTP {response.status}"
                    elif response.status != 200:
                        raise ProtocolError(response.status, (await response.text())[:EXCERPT_CHARS])
                    else:
                        try:
                            body = await response.json(content_type=None)
                        except ValueError:
                            raise ProtocolError(response.status, (await response.text())[:EXCERPT_CHARS])
                        usage = body.get("usage") if isinstance(body, dict) else None
                        if usage:
                            logger.info(f"Token usage: prompt={usage.get('prompt_tokens', '?')}, "
                                        f"completion={usage.get('completion_tokens', '?')}")
                        return _completion_text(body)
            except asyncio.TimeoutError:
                if attempt >= cfg.max_retries:
                    raise LlmTimeout(f"no reply from {url} within {cfg.timeout}s after {attempt + 1} attempt(s)")
                retry_reason = "timeout"
            except aiohttp.ClientConnectionError as e:
                if attempt >= cfg.max_retries:
                    raise LlmTimeout(f"connection to {url} failed after {attempt + 1} attempt(s): {e}")
                retry_reason = f"connection error ({type(e).__name__})"

            delay = cfg.backoff_base * 2 ** attempt
            logger.warning(f"Chat request failed with {retry_reason}; retrying in {delay:.1f}s")
            await asyncio.sleep(delay)
            attempt += 1
    finally:
        if own_session:
            await session.close()


class LlmProposer(Proposer):
    """Features prompt, then abstraction prompt; fixes resend the whole conversation."""

    def __init__(self, cfg: ProposerConfig):
        self.cfg = cfg
        self.label = cfg.display_label()
        self.calls = 0
        self._session: Optional[aiohttp.ClientSession] = None

    def _get_session(self) -> aiohttp.ClientSession:
        if self._session is None or self._session.closed:
            self._session = aiohttp.ClientSession(timeout=aiohttp.ClientTimeout(total=self.cfg.timeout))
        return self._session

    async def _ask(self, conv: Conversation, prompt: str) -> str:
        conv.add_user(prompt)
        reply = await llm_chat(self.cfg, conv, self._get_session())
        conv.add_assistant(reply)
        return reply

    async def propose_initial(self, dom: GpDomain, insts: Sequence[GpInstance], conv: Conversation) -> Proposal:
        if not conv.system:
            conv.system = SYSTEM_PROMPT
        # Step 1: features
        features = await self._ask(conv, render_feature_prompt(dom))
        # Step 2: abstraction over the generation instances
        reply = await self._ask(conv, render_abstraction_prompt(dom, insts, features))
        self.calls += 1
        return Proposal(text=reply, iteration=self.calls, source=self.cfg.model)

    async def propose_fix(self, conv: Conversation, prompt: str) -> Proposal:
        reply = await self._ask(conv, prompt)
        self.calls += 1
        return Proposal(text=reply, iteration=self.calls, source=self.cfg.model)

    async def close(self) -> None:
        if self._session is not None and not self._session.closed:
            await self._session.close()
