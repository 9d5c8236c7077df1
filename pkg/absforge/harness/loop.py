"""Generate, debug and evaluate: the bounded repair loop around a proposer."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from absforge.app.errors import DocError, ProposerError
from absforge.app.models import Budgets, IterationRecord, RunConfig, RunRecord
from absforge.debug.pipeline import Accepted, PipelineOutcome, Rejected, plans_as_text, run_pipeline
from absforge.debug.reports import DebugReport, PromptContext, render_prompt
from absforge.harness.evaluation import evaluate_abstraction
from absforge.planning.pddl_core import GpDomain, GpInstance
from absforge.planning.qnp_format import format_qnp
from absforge.planning.refinement import Abstraction
from absforge.proposer.base import Conversation, Proposer
from absforge.proposer.documents import (
    AbstractionDoc,
    doc_invalid,
    parse_abstraction_doc,
    serialize_doc,
    validate_doc,
)
from absforge.proposer.file_proposer import make_proposer
from absforge.utils.storage import load_domain, load_instances


logger = logging.getLogger(__name__)


@dataclass
class Verdict:
    """Result of checking one proposal."""
    outcome: PipelineOutcome
    doc: Optional[AbstractionDoc] = None
    abstraction: Optional[Abstraction] = None


def check_proposal(text: str, dom: GpDomain, insts: Sequence[GpInstance],
                   budgets: Optional[Budgets] = None) -> Verdict:
    """Document checks, then the staged pipeline on ``insts``."""
    try:
        doc = parse_abstraction_doc(text, dom)
    except DocError as e:
        return Verdict(Rejected(doc_invalid([str(e)], f"the reply is not a valid abstraction document: {e}")))
    built: Union[Abstraction, DebugReport] = validate_doc(doc, dom)
    if isinstance(built, DebugReport):
        return Verdict(Rejected(built), doc)
    return Verdict(run_pipeline(built, insts, budgets=budgets), doc, built)


def prompt_context(dom: GpDomain, insts: Sequence[GpInstance], text: str, verdict: Verdict) -> PromptContext:
    outcome = verdict.outcome
    policy = outcome.policy if isinstance(outcome, Rejected) else None
    return PromptContext(
        domain_text=dom.source_text,
        abstraction_text=serialize_doc(verdict.doc) if verdict.doc is not None else text,
        qnp_text=format_qnp(verdict.abstraction.qnp) if verdict.abstraction is not None else "",
        policy_text=str(policy) if policy is not None else "",
        instance_texts={inst.name: inst.source_text for inst in insts},
    )


async def run_loop(cfg: RunConfig, proposer: Optional[Proposer] = None) -> RunRecord:
    """Propose, check, feed the report back; at most ``cfg.max_iterations`` fixes.

    Input files must parse; proposer and I/O errors end the run with a
    partial record carrying the error.
    """
    # Step 1: inputs
    dom = await load_domain(cfg.domain)
    training = await load_instances(cfg.training, dom)
    evaluation = await load_instances(cfg.evaluation, dom)
    init_count, _ = cfg.split_counts()
    shown = training[:init_count]
    checked = training[: len(cfg.checked_instances())]

    proposer = proposer or make_proposer(cfg.proposer)
    record = RunRecord(
        domain=dom.name,
        proposer=proposer.label,
        debugging=cfg.debugging,
        max_iterations=cfg.max_iterations,
        seed=cfg.seed,
    )
    logger.info(f"Run on {dom.name}: {len(checked)} training, {len(evaluation)} evaluation instances, "
                f"proposer {proposer.label}, N={cfg.max_iterations}, debugging={cfg.debugging}")

    conv = Conversation(token_budget=cfg.proposer.token_budget)
    accepted: Optional[Accepted] = None
    abstraction: Optional[Abstraction] = None
    try:
        # Step 2: initial proposal
        proposal = await proposer.propose_initial(dom, shown, conv)
        fixes = 0
        while True:
            # Step 3: check it
            verdict = check_proposal(proposal.text, dom, checked, cfg.budgets)
            item = IterationRecord(
                iteration=len(record.iterations) + 1,
                reply=proposal.text,
                document=verdict.doc.model_dump() if verdict.doc is not None else None,
                accepted=verdict.outcome.accepted,
            )
            record.iterations.append(item)
            if isinstance(verdict.outcome, Accepted):
                accepted, abstraction = verdict.outcome, verdict.abstraction
                record.accepted = True
                record.accepted_iteration = item.iteration
                record.final_document = item.document
                record.policy = accepted.policy.to_json()
                record.training_plans = plans_as_text(accepted)
                logger.info(f"Abstraction accepted at iteration {item.iteration}")
                break

            report = verdict.outcome.report
            item.stage = report.stage
            item.report = report.to_json()
            record.count_stage(report.stage)
            if not cfg.debugging or fixes >= cfg.max_iterations:
                logger.info(f"Stopping after {len(record.iterations)} proposal(s) without an accepted abstraction")
                break

            # Step 4: feedback
            prompt = render_prompt(report, prompt_context(dom, checked, proposal.text, verdict))
            proposal = await proposer.propose_fix(conv, prompt)
            fixes += 1
    except (ProposerError, OSError) as e:
        logger.error(f"Run aborted: {e}")
        record.error = f"{type(e).__name__}: {e}"
        return record
    finally:
        await proposer.close()

    # Step 5: evaluation
    if accepted is not None and abstraction is not None:
        result = evaluate_abstraction(abstraction, accepted.policy, evaluation, cfg.budgets)
        record.coverage = result.coverage
        record.evaluations = result.evaluations
    return record

