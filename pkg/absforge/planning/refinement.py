"""Refinement mappings between a QNP abstraction and LL instances."""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from absforge.app.errors import UnknownHlAction
from absforge.planning.feature_lang import Feature, eval_count, eval_formula, predicates_of
from absforge.planning.pddl_core import GpInstance, GroundAction, GroundState
from absforge.planning.qnp_model import DEC, INC, QnpAction, QnpProblem, QState, render_literal


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RefinementMapping:
    """Features for every QNP variable plus the HL action -> LL schema map.

    ``hl_actions`` lists every HL action of the paired QNP, including those
    without an ``action_map`` entry.
    """
    bool_features: Tuple[Feature, ...]
    num_features: Tuple[Feature, ...]
    action_map: Dict[str, str]
    hl_actions: FrozenSet[str]

    @property
    def features(self) -> Tuple[Feature, ...]:
        return self.num_features + self.bool_features

    def feature(self, name: str) -> Feature:
        for feat in self.features:
            if feat.name == name:
                return feat
        raise KeyError(name)

    @property
    def unmapped_actions(self) -> List[str]:
        return sorted(a for a in self.hl_actions if a not in self.action_map)


@dataclass(frozen=True)
class AbstractValuation:
    bool_vals: Tuple[Tuple[str, bool], ...] = ()
    num_vals: Tuple[Tuple[str, int], ...] = ()

    def bool(self, name: str) -> bool:
        return dict(self.bool_vals)[name]

    def num(self, name: str) -> int:
        return dict(self.num_vals)[name]

    def as_dict(self) -> Dict[str, Union[bool, int]]:
        return dict(self.num_vals + self.bool_vals)

    def __str__(self) -> str:
        nums = [f"{n}={c}" for n, c in self.num_vals]
        bools = [render_literal(p, v, False) for p, v in self.bool_vals]
        return " ".join(nums + bools)


@dataclass(frozen=True)
class Abstraction:
    qnp: QnpProblem
    mapping: RefinementMapping
    feature_sources: Dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        bools = tuple(f.name for f in self.mapping.bool_features)
        nums = tuple(f.name for f in self.mapping.num_features)
        if bools != self.qnp.bools or nums != self.qnp.nums:
            raise ValueError("mapping features do not match the QNP variables")
        if set(self.qnp.action_names()) != set(self.mapping.hl_actions):
            raise ValueError("mapping HL actions do not match the QNP actions")


def abstract_state(m: RefinementMapping, s: GroundState, objs) -> AbstractValuation:
    objects = objs.objects_by_type if isinstance(objs, GpInstance) else objs
    return AbstractValuation(
        bool_vals=tuple((f.name, eval_formula(f.definition, s, objects, {})) for f in m.bool_features),
        num_vals=tuple((f.name, eval_count(f.definition, s, objects)) for f in m.num_features),
    )


def to_qstate(v: AbstractValuation) -> QState:
    return QState(bools=v.bool_vals, nums=tuple((n, c > 0) for n, c in v.num_vals))


def goal_state(inst: GpInstance) -> GroundState:
    """Goal atoms plus the static atoms of the initial state (closed world)."""
    return GroundState(frozenset(inst.goal) | inst.static_atoms)


def abstract_goal(m: RefinementMapping, inst: GpInstance) -> AbstractValuation:
    return abstract_state(m, goal_state(inst), inst)


def goal_evaluation_warnings(m: RefinementMapping, inst: GpInstance) -> List[str]:
    """Features whose value over goal ∪ statics may be misread.

    A feature is flagged when it mentions a fluent predicate with no atom in
    the goal; under the closed world such atoms all read as false.
    """
    statics = inst.domain.static_predicates
    goal_preds = {atom[0] for atom in inst.goal}
    warnings = []
    for feat in m.features:
        loose = sorted(p for p in predicates_of(feat.definition) if p not in statics and p not in goal_preds)
        if loose:
            warnings.append(f"feature {feat.name} mentions {', '.join(loose)}, absent from the goal of {inst.name}")
    return warnings


@dataclass
class HlInstance:
    init_qstate: QState
    goal_qstate: QState
    init_valuation: AbstractValuation
    goal_valuation: AbstractValuation
    warnings: List[str] = field(default_factory=list)


@dataclass
class LiteralViolation:
    side: str  # "init" or "goal"
    literal: str
    feature: str
    value: Union[bool, int]

    def __str__(self) -> str:
        return f"{self.side} literal {self.literal} violated: {self.feature} = {self.value}"


@dataclass
class MismatchReport:
    instance: str
    violations: List[LiteralViolation]
    init_valuation: AbstractValuation
    goal_valuation: AbstractValuation


def _violations(side: str, literals: Dict[str, bool], v: AbstractValuation, P: QnpProblem) -> List[LiteralViolation]:
    q = to_qstate(v)
    values = v.as_dict()
    return [
        LiteralViolation(side, render_literal(var, want, P.is_numeric(var)), var, values[var])
        for var, want in literals.items()
        if q[var] != want
    ]


def check_hl_instance(A: Abstraction, inst: GpInstance) -> Union[HlInstance, MismatchReport]:
    m = A.mapping
    init_val = abstract_state(m, inst.init, inst)
    goal_val = abstract_goal(m, inst)
    violations = _violations("init", A.qnp.init, init_val, A.qnp) + _violations("goal", A.qnp.goal, goal_val, A.qnp)
    if violations:
        logger.info(f"Instance {inst.name} is not an instance of the abstraction: {violations[0]}")
        return MismatchReport(inst.name, violations, init_val, goal_val)
    warnings = goal_evaluation_warnings(m, inst)
    for warning in warnings:
        logger.info(warning)
    return HlInstance(to_qstate(init_val), to_qstate(goal_val), init_val, goal_val, warnings)


def is_refinement(a_l: GroundAction, a_h: str, m: RefinementMapping) -> bool:
    if a_h not in m.hl_actions:
        raise UnknownHlAction(f"unknown HL action '{a_h}'")
    return m.action_map.get(a_h) == a_l.schema


def transition_consistent(a_h: QnpAction, v: AbstractValuation, v_next: AbstractValuation) -> bool:
    """Booleans follow the effects (frame elsewhere); counts move strictly in the
    direction of inc/dec and stay put when untouched."""
    after = dict(v_next.bool_vals)
    for name, value in v.bool_vals:
        if after[name] != a_h.bool_eff.get(name, value):
            return False
    after_counts = dict(v_next.num_vals)
    for name, count in v.num_vals:
        effect = a_h.num_eff.get(name)
        new = after_counts[name]
        if effect == DEC and not new < count:
            return False
        if effect == INC and not new > count:
            return False
        if effect is None and new != count:
            return False
    return True


def hl_action(A: Abstraction, name: Optional[str]) -> QnpAction:
    if name is None or name not in A.mapping.hl_actions:
        raise UnknownHlAction(f"unknown HL action '{name}'")
    return A.qnp.action(name)
