"""Generation prompts: features first, then the QNP abstraction."""

import json
from typing import Sequence

from absforge.app.errors import EmptyTrainingSet
from absforge.planning.pddl_core import GpDomain, GpInstance


SYSTEM_PROMPT = (
    "You are an expert in automated planning. You design qualitative numerical planning (QNP) "
    "abstractions of generalized planning problems given as PDDL domains and instances."
)

FORMULA_GRAMMAR = """\
f     := atom | (= term term) | (not f) | (and f*) | (or f*)
       | (exists (tvar+) f) | (forall (tvar+) f)
count := (count (tvar+) f)
tvar  := ?name | ?name - typename
atom  := (pred term*)
term  := ?name | objectname"""

DOCUMENT_SCHEMA = {
    "features": [
        {"name": "N", "kind": "numerical", "definition": "(count (?x - type) f)"},
        {"name": "P", "kind": "boolean", "definition": "(exists (?x - type) f)"},
    ],
    "qnp": {
        "bools": ["P"],
        "nums": ["N"],
        "actions": [
            {"name": "Act", "pre": ["N>0", "!P"], "bool_eff": ["P"], "num_eff": ["dec(N)"]},
        ],
        "init": ["N>0", "!P"],
        "goal": ["N=0"],
    },
    "action_map": [{"hl_name": "Act", "ll_schema": "pddl-action-name"}],
}

LITERAL_RULES = [
    "Literals are written N>0 or N=0 for numerical variables and P or !P for boolean ones.",
    "Numerical effects are inc(N) or dec(N); an action that decrements N must have N>0 in its precondition.",
    "Every QNP variable needs exactly one feature with the same name and kind.",
    "Every QNP action is refined by exactly one action schema of the PDDL domain (action_map).",
]


def _schema_block() -> str:
    return json.dumps(DOCUMENT_SCHEMA, ensure_ascii=False, indent=2)


def render_feature_prompt(dom: GpDomain) -> str:
    parts = [
        "Input: the PDDL domain D_l below.",
        "",
        dom.source_text.strip() or f"(define (domain {dom.name}))",
        "",
        "Generate Boolean and numerical features according to the following template:",
        "- Boolean feature: p := exists x. phi(x), where phi(x) is a first-order formula over D_l.",
        "- Numerical feature: n := #x. delta(x), where delta(x) is a first-order formula over D_l "
        "(the number of bindings of x that satisfy delta).",
        "",
        "Write every formula in this grammar (predicates and types must come from D_l):",
        FORMULA_GRAMMAR,
        "",
        "Output the Boolean feature set B and the numerical feature set X as a JSON list of objects "
        'with the keys "name", "kind" ("boolean" or "numerical") and "definition".',
    ]
    return "\n".join(parts)


def render_abstraction_prompt(dom: GpDomain, insts: Sequence[GpInstance], features: str) -> str:
    if not insts:
        raise EmptyTrainingSet("at least one training instance is needed to generate an abstraction")
    parts = [
        "Input: the PDDL domain D_l and the instances Q_l below.",
        "",
        dom.source_text.strip() or f"(define (domain {dom.name}))",
        "",
    ]
    for inst in insts:
        parts.append(f"Instance {inst.name}:")
        parts.append(inst.source_text.strip() or "(not available)")
        parts.append("")
    parts += [
        "Features:",
        features.strip() or "(none)",
        "",
        "Generate a QNP abstraction for these instances based on the features, as follows.",
        "- Step 1: compute the abstraction S_0 of the initial states of the instances;",
        "- Step 2: compute the abstraction S_G of the goals of the instances;",
        "- Step 3: compute the abstract action set A_h from the action set A_l of the domain D_l.",
        "",
        "Output the QNP Q = <D_h, S_0, S_G> with D_h = <B, X, A_h>, and the refinement mapping m, "
        "as a single JSON object shaped like this:",
        _schema_block(),
        "",
        *LITERAL_RULES,
        "",
        "Formula grammar:",
        FORMULA_GRAMMAR,
    ]
    return "\n".join(parts)
