"""Abstraction documents: JSON schema, extraction from model replies and validation."""

import json
import logging
import re
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, ValidationError

from absforge.app.errors import DocError, FormulaError, FormulaParseError, NoJsonFound, SchemaViolation
from absforge.debug.reports import DebugReport
from absforge.planning.feature_lang import BOOLEAN, NUMERICAL, Feature, parse_feature
from absforge.planning.pddl_core import GpDomain
from absforge.planning.qnp_format import parse_num_effects
from absforge.planning.qnp_model import QnpAction, QnpProblem, parse_literal
from absforge.planning.refinement import Abstraction, RefinementMapping
from absforge.states.stages import DebugStage


logger = logging.getLogger(__name__)


class FeatureSpec(BaseModel):
    name: str
    kind: Literal["boolean", "numerical"]
    definition: str


class QnpActionSpec(BaseModel):
    name: str
    pre: List[str] = Field(default_factory=list)
    bool_eff: List[str] = Field(default_factory=list)
    num_eff: List[str] = Field(default_factory=list)


class QnpSpec(BaseModel):
    bools: List[str] = Field(default_factory=list)
    nums: List[str] = Field(default_factory=list)
    actions: List[QnpActionSpec] = Field(default_factory=list)
    init: List[str] = Field(default_factory=list)
    goal: List[str] = Field(default_factory=list)


class ActionMapEntry(BaseModel):
    hl_name: str
    ll_schema: str


class AbstractionDoc(BaseModel):
    """Features, QNP and action map as exchanged with a proposer."""
    features: List[FeatureSpec]
    qnp: QnpSpec
    action_map: List[ActionMapEntry] = Field(default_factory=list)


def serialize_doc(doc: AbstractionDoc) -> str:
    return json.dumps(doc.model_dump(), ensure_ascii=False, indent=2)


_FENCE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL | re.IGNORECASE)


def extract_json_object(text: str) -> Dict[str, Any]:
    """First JSON object in ``text``, looking inside markdown fences first."""
    decoder = json.JSONDecoder()
    sources = [m.group(1) for m in _FENCE.finditer(text)] + [text]
    for source in sources:
        for match in re.finditer(r"\{", source):
            try:
                value, _ = decoder.raw_decode(source, match.start())
            except json.JSONDecodeError:
                continue
            if isinstance(value, dict):
                return value
    raise NoJsonFound("no JSON object found in the reply")


def _error_path(loc: Tuple) -> str:
    path = ""
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else str(part))
    return path


def _check_literals(texts: List[str], path: str) -> None:
    for i, text in enumerate(texts):
        try:
            parse_literal(text)
        except ValueError as e:
            raise SchemaViolation(str(e), f"{path}[{i}]")


def parse_abstraction_doc(text: str, dom: Optional[GpDomain] = None) -> AbstractionDoc:
    """Extract and schema-check the document in a model reply.

    With ``dom`` the feature definitions are also resolved against the domain.
    """
    raw = extract_json_object(text)
    try:
        doc = AbstractionDoc.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        raise SchemaViolation(first["msg"], _error_path(first["loc"]))

    for where in ("init", "goal"):
        _check_literals(getattr(doc.qnp, where), f"qnp.{where}")
    for i, action in enumerate(doc.qnp.actions):
        path = f"qnp.actions[{i}]"
        _check_literals(action.pre, f"{path}.pre")
        _check_literals(action.bool_eff, f"{path}.bool_eff")
        try:
            effects = parse_num_effects(action.num_eff)
        except ValueError as e:
            raise SchemaViolation(str(e), f"{path}.num_eff")
        positive = {var for var, value, _ in map(parse_literal, action.pre) if value}
        for var, effect in effects.items():
            if effect == "dec" and var not in positive:
                raise SchemaViolation(f"action {action.name}: dec({var}) requires precondition {var}>0", path)

    for feat in doc.features:
        try:
            parse_feature(feat.name, feat.kind, feat.definition, dom)
        except (FormulaError, ValueError) as e:
            raise FormulaParseError(str(e), feat.name)
    return doc


def _literal_map(texts: List[str], path: str, bools: set, nums: set, violations: List[str]) -> Dict[str, bool]:
    result: Dict[str, bool] = {}
    for i, text in enumerate(texts):
        try:
            var, value, numeric = parse_literal(text)
        except ValueError as e:
            violations.append(f"{path}[{i}]: {e}")
            continue
        if var in nums and not numeric:
            violations.append(f"{path}[{i}]: numerical variable {var} needs {var}>0 or {var}=0")
            continue
        if var in bools and numeric:
            violations.append(f"{path}[{i}]: boolean variable {var} written as a numerical literal")
            continue
        if result.get(var, value) != value:
            violations.append(f"{path}: inconsistent literals for {var}")
            continue
        result[var] = value
    return result


def _build(doc: AbstractionDoc, dom: GpDomain, violations: List[str]) -> Optional[Abstraction]:
    bools, nums = list(doc.qnp.bools), list(doc.qnp.nums)
    bool_set, num_set = set(bools), set(nums)

    features: Dict[str, Feature] = {}
    sources: Dict[str, str] = {}
    for feat in doc.features:
        if feat.name in features or feat.name in sources:
            violations.append(f"feature {feat.name} is defined more than once")
            continue
        sources[feat.name] = feat.definition
        expected = BOOLEAN if feat.name in bool_set else NUMERICAL if feat.name in num_set else None
        if expected is None:
            violations.append(f"feature {feat.name} is not a QNP variable")
            continue
        if feat.kind != expected:
            violations.append(f"feature {feat.name} is {feat.kind} but the QNP declares it {expected}")
            continue
        try:
            features[feat.name] = parse_feature(feat.name, feat.kind, feat.definition, dom)
        except (FormulaError, ValueError) as e:
            violations.append(f"feature {feat.name}: {e}")
    for var in bools + nums:
        if var not in sources:
            violations.append(f"QNP variable {var} has no feature")

    actions = []
    for i, spec in enumerate(doc.qnp.actions):
        path = f"qnp.actions[{i}]"
        pre = _literal_map(spec.pre, f"{path}.pre", bool_set, num_set, violations)
        eff = _literal_map(spec.bool_eff, f"{path}.bool_eff", bool_set, num_set, violations)
        try:
            num_eff = parse_num_effects(spec.num_eff)
        except ValueError as e:
            violations.append(f"{path}.num_eff: {e}")
            continue
        try:
            actions.append(QnpAction(name=spec.name, pre=pre, bool_eff=eff, num_eff=num_eff))
        except ValidationError as e:
            violations.extend(f"{path}: {err['msg']}" for err in e.errors())

    init = _literal_map(doc.qnp.init, "qnp.init", bool_set, num_set, violations)
    goal = _literal_map(doc.qnp.goal, "qnp.goal", bool_set, num_set, violations)
    qnp = None
    try:
        qnp = QnpProblem(bools=tuple(bools), nums=tuple(nums), actions=tuple(actions), init=init, goal=goal)
    except ValidationError as e:
        violations.extend(f"qnp: {err['msg']}" for err in e.errors())

    hl_names = {spec.name for spec in doc.qnp.actions}
    action_map: Dict[str, str] = {}
    for i, entry in enumerate(doc.action_map):
        path = f"action_map[{i}]"
        if entry.hl_name not in hl_names:
            violations.append(f"{path}: unknown HL action {entry.hl_name}")
        elif entry.ll_schema not in dom.actions:
            violations.append(f"{path}: {entry.hl_name} maps to undeclared action schema {entry.ll_schema}")
        elif entry.hl_name in action_map and action_map[entry.hl_name] != entry.ll_schema:
            violations.append(f"{path}: {entry.hl_name} maps to more than one action schema")
        else:
            action_map[entry.hl_name] = entry.ll_schema

    if violations or qnp is None:
        return None
    mapping = RefinementMapping(
        bool_features=tuple(features[v] for v in bools),
        num_features=tuple(features[v] for v in nums),
        action_map=action_map,
        hl_actions=frozenset(hl_names),
    )
    if mapping.unmapped_actions:
        logger.warning(f"HL actions without a refinement: {', '.join(mapping.unmapped_actions)}")
    return Abstraction(qnp=qnp, mapping=mapping, feature_sources=sources)


def doc_invalid(violations: List[str], message: Optional[str] = None) -> DebugReport:
    return DebugReport(
        stage=DebugStage.DOC_INVALID,
        message=message or f"{len(violations)} problem(s) in the abstraction document",
        payload={"violations": violations},
    )


def validate_doc(doc: AbstractionDoc, dom: GpDomain) -> Union[Abstraction, DebugReport]:
    """Build the Abstraction, or a DOC_INVALID report naming every violation."""
    violations: List[str] = []
    try:
        abstraction = _build(doc, dom, violations)
    except Exception as e:  # noqa: BLE001 - any failure here is a document problem
        logger.exception("Unexpected error while validating an abstraction document")
        violations.append(f"unexpected validation error: {e}")
        abstraction = None
    if abstraction is None:
        logger.info(f"Abstraction document rejected: {violations[0] if violations else 'unknown problem'}")
        return doc_invalid(violations or ["document could not be built"])
    return abstraction


def load_abstraction(text: str, dom: GpDomain) -> Union[Abstraction, DebugReport]:
    """parse_abstraction_doc followed by validate_doc; parse errors become DOC_INVALID."""
    try:
        doc = parse_abstraction_doc(text, dom)
    except DocError as e:
        return doc_invalid([str(e)], f"the reply is not a valid abstraction document: {e}")
    return validate_doc(doc, dom)


def abstraction_to_doc(A: Abstraction) -> AbstractionDoc:
    qnp = A.qnp
    return AbstractionDoc(
        features=[
            FeatureSpec(name=f.name, kind=f.kind, definition=A.feature_sources.get(f.name, str(f.definition)))
            for f in A.mapping.features
        ],
        qnp=QnpSpec(
            bools=list(qnp.bools),
            nums=list(qnp.nums),
            actions=[QnpActionSpec(name=a.name, **a.render(qnp.nums)) for a in qnp.actions],
            init=qnp.render_literals(qnp.init),
            goal=qnp.render_literals(qnp.goal),
        ),
        action_map=[ActionMapEntry(hl_name=h, ll_schema=s) for h, s in A.mapping.action_map.items()],
    )
