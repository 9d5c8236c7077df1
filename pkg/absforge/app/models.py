from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from absforge.config.config import (
    API_KEY_ENV,
    BFS_NODE_BUDGET,
    CONVERSATION_TOKEN_BUDGET,
    DEFAULT_TRAINING_SPLIT,
    EXECUTION_STEP_BOUND,
    LLM_BACKOFF_BASE,
    LLM_ENDPOINT,
    LLM_MAX_RETRIES,
    LLM_MODEL,
    LLM_TIMEOUT,
    MAX_DEBUG_ITERATIONS,
    OUTPUT_DIR,
    SOLVER_NODE_BUDGET,
    SOLVER_TIME_LIMIT,
    TREE_NODE_BUDGET,
)
from absforge.states.stages import DebugStage


class Budgets(BaseModel):
    """Search and step budgets shared by the checks."""
    solver_nodes: int = Field(default=SOLVER_NODE_BUDGET, ge=0)
    solver_time: float = Field(default=SOLVER_TIME_LIMIT, gt=0)
    bfs_nodes: int = Field(default=BFS_NODE_BUDGET, ge=1)
    tree_nodes: int = Field(default=TREE_NODE_BUDGET, ge=1)
    # None: 10 x (1 + sum of the initial counts)
    hlisc_step_bound: Optional[int] = Field(default=None, ge=1)
    execution_step_bound: int = Field(default=EXECUTION_STEP_BOUND, ge=1)


class ProposerConfig(BaseModel):
    """Proposer settings. Holds the name of the key variable, never the key."""
    kind: Literal["llm", "file"] = "file"
    label: Optional[str] = None
    endpoint: Optional[str] = LLM_ENDPOINT
    model: Optional[str] = LLM_MODEL
    api_key_env: str = API_KEY_ENV
    timeout: float = Field(default=LLM_TIMEOUT, gt=0)
    max_retries: int = Field(default=LLM_MAX_RETRIES, ge=0)
    backoff_base: float = Field(default=LLM_BACKOFF_BASE, ge=0)
    token_budget: int = Field(default=CONVERSATION_TOKEN_BUDGET, ge=1)
    paths: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _llm_needs_endpoint(self):
        if self.kind == "llm" and (not self.endpoint or not self.model):
            raise ValueError("an llm proposer needs both endpoint and model")
        return self

    def display_label(self) -> str:
        if self.label:
            return self.label
        return self.model if self.kind == "llm" and self.model else self.kind


class RunConfig(BaseModel):
    """Configuration of one generate-debug-evaluate run."""
    domain: str
    training: List[str]
    evaluation: List[str] = Field(default_factory=list)
    proposer: ProposerConfig = Field(default_factory=ProposerConfig)
    max_iterations: int = Field(default=MAX_DEBUG_ITERATIONS, ge=0)
    training_split: str = DEFAULT_TRAINING_SPLIT
    debugging: bool = True
    budgets: Budgets = Field(default_factory=Budgets)
    output_dir: str = str(OUTPUT_DIR)
    seed: int = 0

    @field_validator("training")
    @classmethod
    def _at_least_one(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("at least one training instance is required")
        return value

    @field_validator("training_split")
    @classmethod
    def _split_format(cls, value: str) -> str:
        parts = value.split(":")
        if len(parts) != 2 or not all(p.isdigit() for p in parts) or int(parts[0]) < 1:
            raise ValueError("training_split must look like 'init:debug' with init >= 1")
        return value

    def split_counts(self) -> Tuple[int, int]:
        init, debug = (int(p) for p in self.training_split.split(":"))
        return init, debug

    def checked_instances(self) -> List[str]:
        """Training instances the pipeline checks (init and debug subsets, in order)."""
        init, debug = self.split_counts()
        return self.training[: init + debug]


class IterationRecord(BaseModel):
    iteration: int
    reply: str = ""
    document: Optional[Dict[str, Any]] = None
    accepted: bool = False
    stage: Optional[DebugStage] = None
    report: Optional[Dict[str, Any]] = None


class InstanceEvaluation(BaseModel):
    instance: str
    solved: bool
    plan: List[str] = Field(default_factory=list)
    reason: str = ""


class RunRecord(BaseModel):
    """Everything a run produced. Holds no timestamps or random ids."""
    domain: str
    proposer: str
    debugging: bool = True
    max_iterations: int = MAX_DEBUG_ITERATIONS
    seed: int = 0
    iterations: List[IterationRecord] = Field(default_factory=list)
    accepted: bool = False
    accepted_iteration: Optional[int] = None
    final_document: Optional[Dict[str, Any]] = None
    policy: List[Dict[str, str]] = Field(default_factory=list)
    training_plans: Dict[str, List[str]] = Field(default_factory=dict)
    coverage: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    evaluations: List[InstanceEvaluation] = Field(default_factory=list)
    stage_counts: Dict[str, int] = Field(
        default_factory=lambda: {stage.value: 0 for stage in DebugStage}
    )
    error: Optional[str] = None

    def count_stage(self, stage: DebugStage) -> None:
        self.stage_counts[stage.value] = self.stage_counts.get(stage.value, 0) + 1

    def format_summary(self) -> str:
        """Human readable run summary for the console."""
        parts = [
            f"Domain: {self.domain}",
            f"Proposer: {self.proposer} ({'with' if self.debugging else 'without'} automated debugging)",
            f"Proposals: {len(self.iterations)}",
        ]
        if self.accepted:
            parts.append(f"Accepted at iteration {self.accepted_iteration}")
        else:
            parts.append("No abstraction accepted")
        for it in self.iterations:
            verdict = "accepted" if it.accepted else (it.stage.value if it.stage else "-")
            parts.append(f"  #{it.iteration}: {verdict}")
        if self.coverage is not None:
            parts.append(f"Coverage: {self.coverage:.2f} ({sum(e.solved for e in self.evaluations)}/{len(self.evaluations)})")
        elif self.accepted:
            parts.append("Coverage: n/a (no evaluation instances)")
        nonzero = {k: v for k, v in self.stage_counts.items() if v}
        if nonzero:
            parts.append("Detected errors: " + ", ".join(f"{k}={v}" for k, v in nonzero.items()))
        if self.error:
            parts.append(f"Aborted: {self.error}")
        return "\n".join(parts)
