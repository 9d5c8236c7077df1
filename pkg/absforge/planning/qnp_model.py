"""Qualitative numerical planning problems, qstates and policies.

A literal is a pair ``(variable, value)``. For a boolean variable the value is
its truth value; for a numerical variable ``True`` means ``x>0`` and
``False`` means ``x=0``. Variable names are unique across both kinds, so a
partial literal set is a plain ``dict``.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Dict, Iterable, List, Literal, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from absforge.app.errors import NotApplicable


logger = logging.getLogger(__name__)

INC = "inc"
DEC = "dec"
NumEffect = Literal["inc", "dec"]


def render_literal(var: str, value: bool, numeric: bool) -> str:
    if numeric:
        return f"{var}>0" if value else f"{var}=0"
    return var if value else f"!{var}"


_NEGATIONS = ("!", "¬", "~", "-")


def parse_literal(text: str) -> Tuple[str, bool, Optional[bool]]:
    """Parse ``X>0``, ``X=0``, ``P``, ``!P`` (also ``¬P``, ``-P``, ``~P``, ``not P``).

    Returns (variable, value, numeric) where numeric is None for a plain
    boolean-looking literal.
    """
    raw = text.strip()
    if not raw:
        raise ValueError("empty literal")
    compact = raw.replace(" ", "")
    if compact.endswith(">0"):
        return _check_name(compact[:-2], raw), True, True
    if compact.endswith("=0"):
        return _check_name(compact[:-2], raw), False, True
    if raw.lower().startswith("not "):
        return _check_name(raw[4:].strip(), raw), False, False
    if compact[0] in _NEGATIONS:
        return _check_name(compact[1:], raw), False, False
    return _check_name(compact, raw), True, False


def _check_name(name: str, raw: str) -> str:
    if not name or not (name[0].isalpha() or name[0] == "_") or not all(c.isalnum() or c in "_-" for c in name):
        raise ValueError(f"malformed literal '{raw}'")
    return name


def parse_literals(texts: Iterable[str]) -> Dict[str, bool]:
    """Parse a literal list into a consistent partial assignment."""
    result: Dict[str, bool] = {}
    for text in texts:
        var, value, _ = parse_literal(text)
        if result.get(var, value) != value:
            raise ValueError(f"inconsistent literals for '{var}'")
        result[var] = value
    return result


class QnpAction(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    pre: Dict[str, bool] = Field(default_factory=dict)
    bool_eff: Dict[str, bool] = Field(default_factory=dict)
    num_eff: Dict[str, NumEffect] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _dec_requires_positive(self):
        for var, effect in self.num_eff.items():
            if effect == DEC and self.pre.get(var) is not True:
                raise ValueError(f"action {self.name}: dec({var}) requires precondition {var}>0")
        overlap = set(self.bool_eff) & set(self.num_eff)
        if overlap:
            raise ValueError(f"action {self.name}: {sorted(overlap)} used as both boolean and numerical effect")
        return self

    def render(self, nums: Iterable[str]) -> Dict[str, List[str]]:
        numeric = set(nums)
        return {
            "pre": [render_literal(v, val, v in numeric) for v, val in self.pre.items()],
            "bool_eff": [render_literal(v, val, False) for v, val in self.bool_eff.items()],
            "num_eff": [f"{eff}({v})" for v, eff in self.num_eff.items()],
        }


@dataclass(frozen=True)
class QState:
    """Total assignment over bools and nums, kept in declaration order."""
    bools: Tuple[Tuple[str, bool], ...] = ()
    nums: Tuple[Tuple[str, bool], ...] = ()

    @cached_property
    def values(self) -> Dict[str, bool]:
        return dict(self.nums + self.bools)

    def __getitem__(self, var: str) -> bool:
        return self.values[var]

    def satisfies(self, literals: Mapping[str, bool]) -> bool:
        values = self.values
        return all(values.get(var) == value for var, value in literals.items())

    def updated(self, changes: Mapping[str, bool]) -> "QState":
        return QState(
            bools=tuple((v, changes.get(v, val)) for v, val in self.bools),
            nums=tuple((v, changes.get(v, val)) for v, val in self.nums),
        )

    def literals(self) -> List[str]:
        return [render_literal(v, val, True) for v, val in self.nums] + [
            render_literal(v, val, False) for v, val in self.bools
        ]

    def __str__(self) -> str:
        return " ".join(self.literals())

    def sort_key(self) -> Tuple:
        return (tuple(val for _, val in self.nums), tuple(val for _, val in self.bools))


class QnpProblem(BaseModel):
    model_config = ConfigDict(frozen=True)

    bools: Tuple[str, ...] = ()
    nums: Tuple[str, ...] = ()
    actions: Tuple[QnpAction, ...] = ()
    init: Dict[str, bool] = Field(default_factory=dict)
    goal: Dict[str, bool] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_references(self):
        both = set(self.bools) & set(self.nums)
        if both:
            raise ValueError(f"variables declared both boolean and numerical: {sorted(both)}")
        if len(set(self.bools)) != len(self.bools) or len(set(self.nums)) != len(self.nums):
            raise ValueError("duplicate variable declaration")
        declared = set(self.bools) | set(self.nums)
        names = [a.name for a in self.actions]
        if len(set(names)) != len(names):
            raise ValueError("duplicate action name")
        for where, literals in (("init", self.init), ("goal", self.goal)):
            for var in literals:
                if var not in declared:
                    raise ValueError(f"{where}: undeclared variable '{var}'")
        for action in self.actions:
            for var in action.pre:
                if var not in declared:
                    raise ValueError(f"action {action.name}: undeclared variable '{var}' in pre")
            for var in action.bool_eff:
                if var not in self.bools:
                    raise ValueError(f"action {action.name}: '{var}' is not a boolean variable")
            for var in action.num_eff:
                if var not in self.nums:
                    raise ValueError(f"action {action.name}: '{var}' is not a numerical variable")
        return self

    def action(self, name: str) -> QnpAction:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def action_names(self) -> List[str]:
        return [a.name for a in self.actions]

    def is_numeric(self, var: str) -> bool:
        return var in self.nums

    def make_qstate(self, values: Mapping[str, bool]) -> QState:
        """Build a qstate from a total mapping (numerical: True means >0)."""
        missing = [v for v in self.nums + self.bools if v not in values]
        if missing:
            raise ValueError(f"qstate is not total, missing {missing}")
        return QState(
            bools=tuple((v, bool(values[v])) for v in self.bools),
            nums=tuple((v, bool(values[v])) for v in self.nums),
        )

    def render_literals(self, literals: Mapping[str, bool]) -> List[str]:
        return [render_literal(v, val, self.is_numeric(v)) for v, val in literals.items()]

    def all_qstates(self) -> List[QState]:
        variables = self.nums + self.bools
        return [self.make_qstate(dict(zip(variables, vals))) for vals in product((True, False), repeat=len(variables))]


def applicable_q(s: QState, a: QnpAction) -> bool:
    return s.satisfies(a.pre)


def successors_q(s: QState, a: QnpAction) -> Tuple[QState, ...]:
    """Qualitative successors: inc forces >0, dec branches into >0 and =0."""
    if not applicable_q(s, a):
        raise NotApplicable(f"{a.name} is not applicable in [{s}]")
    fixed = dict(a.bool_eff)
    decs = []
    for var, effect in a.num_eff.items():
        if effect == INC:
            fixed[var] = True
        else:
            decs.append(var)
    base = s.updated(fixed)
    if not decs:
        return (base,)
    return tuple(base.updated(dict(zip(decs, branch))) for branch in product((True, False), repeat=len(decs)))


def initial_qstates(P: QnpProblem) -> List[QState]:
    free = [v for v in P.nums + P.bools if v not in P.init]
    result = []
    for vals in product((True, False), repeat=len(free)):
        values = dict(P.init)
        values.update(zip(free, vals))
        result.append(P.make_qstate(values))
    return result


def is_goal_q(s: QState, P: QnpProblem) -> bool:
    return s.satisfies(P.goal)


def apply_quantitative(
    a: QnpAction,
    bools: Mapping[str, bool],
    counts: Mapping[str, int],
    amounts: Optional[Mapping[str, int]] = None,
) -> Tuple[Dict[str, bool], Dict[str, int]]:
    """One quantitative step: inc/dec by ``amounts`` (default 1), floored at 0."""
    amounts = amounts or {}
    new_bools = dict(bools)
    new_bools.update(a.bool_eff)
    new_counts = dict(counts)
    for var, effect in a.num_eff.items():
        step = amounts.get(var, 1)
        if step < 1:
            raise ValueError(f"amount for {var} must be positive")
        new_counts[var] = counts[var] + step if effect == INC else max(0, counts[var] - step)
    return new_bools, new_counts


@dataclass
class Policy:
    """Partial mapping from qstates to action names."""
    rules: Dict[QState, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rules)

    def get(self, s: QState) -> Optional[str]:
        return self.rules.get(s)

    def lines(self) -> List[str]:
        ordered = sorted(self.rules.items(), key=lambda item: item[0].sort_key(), reverse=True)
        return [f"{q} => {name}" for q, name in ordered]

    def __str__(self) -> str:
        return "\n".join(self.lines())

    def to_json(self) -> List[Dict[str, str]]:
        return [{"qstate": str(q), "action": name} for q, name in
                sorted(self.rules.items(), key=lambda item: item[0].sort_key(), reverse=True)]
