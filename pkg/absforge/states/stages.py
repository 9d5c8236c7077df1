from enum import Enum
from typing import Dict, Tuple


class DebugStage(str, Enum):
    """Report stages, in the order the checks run."""
    # Step 0: the document itself is malformed
    DOC_INVALID = "DOC_INVALID"

    # Step 1: abstraction solvability
    ASC_UNSOLVABLE = "ASC_UNSOLVABLE"
    ASC_TIMEOUT = "ASC_TIMEOUT"

    # Step 2: HL instance solvability
    HLISC_BAD_INSTANCE = "HLISC_BAD_INSTANCE"
    HLISC_ABORTED = "HLISC_ABORTED"
    HLISC_TIMEOUT = "HLISC_TIMEOUT"

    # Step 3: HL plan refinability
    HLPRC_NO_REFINEMENT = "HLPRC_NO_REFINEMENT"

    # Step 4: LL goal reachability
    LLGRC_BAD_TRANSITION = "LLGRC_BAD_TRANSITION"
    LLGRC_TIMEOUT = "LLGRC_TIMEOUT"


STAGE_GROUPS: Dict[str, Tuple[DebugStage, ...]] = {
    "DOC": (DebugStage.DOC_INVALID,),
    "ASC": (DebugStage.ASC_UNSOLVABLE, DebugStage.ASC_TIMEOUT),
    "HLISC": (DebugStage.HLISC_BAD_INSTANCE, DebugStage.HLISC_ABORTED, DebugStage.HLISC_TIMEOUT),
    "HLPRC": (DebugStage.HLPRC_NO_REFINEMENT,),
    "LLGRC": (DebugStage.LLGRC_BAD_TRANSITION, DebugStage.LLGRC_TIMEOUT),
}


def stage_group(stage: DebugStage) -> str:
    for group, stages in STAGE_GROUPS.items():
        if stage in stages:
            return group
    raise ValueError(f"stage {stage} belongs to no group")
