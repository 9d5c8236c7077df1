"""STRIPS-with-typing PDDL: parsing, grounding and low-level state semantics.

Supported requirements: :strips, :typing, :negative-preconditions, :equality.
Atoms are plain tuples ``(predicate, arg1, ..., argk)``; a state is the set of
true atoms under the closed-world assumption.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from absforge.app.errors import (
    ActionNotApplicable,
    ArityMismatch,
    NegativeGoal,
    PddlError,
    PddlSyntaxError,
    ResourceLimit,
    TypeMismatch,
    UndeclaredObject,
    UndeclaredPredicate,
    UndeclaredType,
    UnsupportedRequirement,
)
from absforge.config.config import BFS_NODE_BUDGET
from absforge.planning.sexpr import SList, Symbol, parse_all, parse_typed_list


logger = logging.getLogger(__name__)

Atom = Tuple[str, ...]

SUPPORTED_REQUIREMENTS = frozenset({":strips", ":typing", ":negative-preconditions", ":equality"})
ROOT_TYPE = "object"


def format_atom(atom: Atom) -> str:
    """Render an atom in PDDL syntax: ``(at b1 r1)``."""
    return "(" + " ".join(atom) + ")"


def is_variable(term: str) -> bool:
    return term.startswith("?")


# Domain types

@dataclass(frozen=True)
class PredicateSchema:
    name: str
    param_types: Tuple[str, ...]

    @property
    def arity(self) -> int:
        return len(self.param_types)


@dataclass(frozen=True)
class ActionSchema:
    """Lifted action; literals are tuples whose terms are variables or constants."""
    name: str
    params: Tuple[Tuple[str, str], ...]  # ((?var, type), ...)
    pre_pos: Tuple[Atom, ...] = ()
    pre_neg: Tuple[Atom, ...] = ()
    eq_pos: Tuple[Tuple[str, str], ...] = ()
    eq_neg: Tuple[Tuple[str, str], ...] = ()
    add: Tuple[Atom, ...] = ()
    delete: Tuple[Atom, ...] = ()

    @property
    def param_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.params)


@dataclass(frozen=True)
class GpDomain:
    name: str
    requirements: FrozenSet[str]
    types: Dict[str, str]  # type -> parent type
    constants: Dict[str, str]  # object -> type
    predicates: Dict[str, PredicateSchema]
    actions: Dict[str, ActionSchema]
    source_text: str = field(default="", compare=False, repr=False)

    @cached_property
    def static_predicates(self) -> FrozenSet[str]:
        """Predicates that occur in no add or delete list of any schema."""
        fluent = {atom[0] for act in self.actions.values() for atom in act.add + act.delete}
        return frozenset(name for name in self.predicates if name not in fluent)

    @cached_property
    def added_predicates(self) -> FrozenSet[str]:
        return frozenset(atom[0] for act in self.actions.values() for atom in act.add)

    def is_subtype(self, sub: str, sup: str) -> bool:
        current: Optional[str] = sub
        while current is not None:
            if current == sup:
                return True
            current = self.types.get(current)
        return sup == ROOT_TYPE

    def has_type(self, type_name: str) -> bool:
        return type_name == ROOT_TYPE or type_name in self.types


@dataclass(frozen=True)
class GroundState:
    """Set of true ground atoms; everything else is false (closed world)."""
    atoms: FrozenSet[Atom] = frozenset()

    def __contains__(self, atom: Atom) -> bool:
        return atom in self.atoms

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(sorted(self.atoms))

    def to_pddl(self) -> List[str]:
        return [format_atom(atom) for atom in sorted(self.atoms)]


@dataclass(frozen=True)
class GroundAction:
    schema: str
    args: Tuple[str, ...]
    pre_pos: FrozenSet[Atom]
    pre_neg: FrozenSet[Atom]
    add: FrozenSet[Atom]
    delete: FrozenSet[Atom]

    def __str__(self) -> str:
        return f"{self.schema}({','.join(self.args)})"

    def to_pddl(self) -> str:
        return "(" + " ".join((self.schema,) + self.args) + ")"

    @property
    def key(self) -> Tuple[str, Tuple[str, ...]]:
        return (self.schema, self.args)


@dataclass(frozen=True)
class Plan:
    steps: Tuple[GroundAction, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def names(self) -> List[str]:
        return [str(step) for step in self.steps]


@dataclass(frozen=True)
class GpInstance:
    name: str
    domain: GpDomain = field(repr=False)
    objects: Dict[str, str]  # object -> type, constants included
    init: GroundState = field(repr=False)
    goal: FrozenSet[Atom] = frozenset()
    source_text: str = field(default="", compare=False, repr=False)

    def __hash__(self) -> int:
        return hash((self.name, self.init, self.goal))

    @cached_property
    def objects_by_type(self) -> Dict[str, Tuple[str, ...]]:
        """Type name -> sorted objects of that type or any subtype."""
        result: Dict[str, List[str]] = {ROOT_TYPE: []}
        for type_name in self.domain.types:
            result.setdefault(type_name, [])
        for obj, obj_type in self.objects.items():
            for type_name in result:
                if self.domain.is_subtype(obj_type, type_name):
                    result[type_name].append(obj)
        return {name: tuple(sorted(objs)) for name, objs in result.items()}

    @cached_property
    def ground_actions(self) -> Tuple[GroundAction, ...]:
        return tuple(_ground(self))

    @cached_property
    def ground_index(self) -> Dict[Tuple[str, Tuple[str, ...]], GroundAction]:
        return {action.key: action for action in self.ground_actions}

    @cached_property
    def static_atoms(self) -> FrozenSet[Atom]:
        statics = self.domain.static_predicates
        return frozenset(atom for atom in self.init.atoms if atom[0] in statics)


class PlanCheck(NamedTuple):
    valid: bool
    failed_at: Optional[int] = None


# Parsing

def _expect_list(node, what: str) -> SList:
    if not isinstance(node, SList):
        raise PddlSyntaxError(f"expected {what}", node.line, node.col)
    return node


def _sections(root: SList, kind: str) -> Tuple[str, List[SList]]:
    if root.head() != "define" or len(root) < 2:
        raise PddlSyntaxError("expected (define ...)", root.line, root.col)
    header = _expect_list(root[1], f"({kind} <name>)")
    if header.head() != kind or len(header) != 2 or not isinstance(header[1], Symbol):
        raise PddlSyntaxError(f"expected ({kind} <name>)", header.line, header.col)
    sections = []
    seen = set()
    for item in root.items[2:]:
        section = _expect_list(item, "section")
        head = section.head()
        if head != ":action":
            if head in seen:
                raise PddlSyntaxError(f"duplicate section '{head}'", section.line, section.col)
            seen.add(head)
        sections.append(section)
    return header[1].text, sections


def _parse_types(section: SList) -> Dict[str, str]:
    pairs, bad = parse_typed_list(section.items[1:])
    if bad is not None:
        raise PddlSyntaxError("malformed :types section", bad.line, bad.col)
    types: Dict[str, str] = {}
    for sym, parent in pairs:
        if sym.text == ROOT_TYPE:
            continue
        types[sym.text] = parent
    for parent in list(types.values()):
        if parent != ROOT_TYPE and parent not in types:
            types[parent] = ROOT_TYPE
    return types


class _DomainBuilder:
    def __init__(self, source: str):
        self.source = source
        self.name = ""
        self.requirements: set = set()
        self.types: Dict[str, str] = {}
        self.constants: Dict[str, str] = {}
        self.predicates: Dict[str, PredicateSchema] = {}
        self.actions: Dict[str, ActionSchema] = {}

    def check_type(self, type_name: str, node) -> None:
        if type_name != ROOT_TYPE and type_name not in self.types:
            raise UndeclaredType(f"undeclared type '{type_name}'", node.line, node.col)

    def requirements_section(self, section: SList) -> None:
        for item in section.items[1:]:
            if not isinstance(item, Symbol):
                raise PddlSyntaxError("malformed :requirements", item.line, item.col)
            if item.text not in SUPPORTED_REQUIREMENTS:
                raise UnsupportedRequirement(f"unsupported requirement {item.text}", item.line, item.col)
            self.requirements.add(item.text)

    def constants_section(self, section: SList) -> None:
        pairs, bad = parse_typed_list(section.items[1:])
        if bad is not None:
            raise PddlSyntaxError("malformed :constants section", bad.line, bad.col)
        for sym, type_name in pairs:
            self.check_type(type_name, sym)
            self.constants[sym.text] = type_name

    def predicates_section(self, section: SList) -> None:
        for item in section.items[1:]:
            decl = _expect_list(item, "predicate declaration")
            if not decl.items or not isinstance(decl[0], Symbol):
                raise PddlSyntaxError("malformed predicate declaration", decl.line, decl.col)
            pairs, bad = parse_typed_list(decl.items[1:])
            if bad is not None:
                raise PddlSyntaxError("malformed predicate parameters", bad.line, bad.col)
            for sym, type_name in pairs:
                if not is_variable(sym.text):
                    raise PddlSyntaxError(f"expected variable, got '{sym.text}'", sym.line, sym.col)
                self.check_type(type_name, sym)
            name = decl[0].text
            if name in self.predicates:
                raise PddlSyntaxError(f"duplicate predicate '{name}'", decl.line, decl.col)
            self.predicates[name] = PredicateSchema(name, tuple(t for _, t in pairs))

    def atom(self, node: SList, variables: Dict[str, str]) -> Atom:
        if not node.items or not isinstance(node[0], Symbol):
            raise PddlSyntaxError("malformed atom", node.line, node.col)
        name = node[0].text
        schema = self.predicates.get(name)
        if schema is None:
            raise UndeclaredPredicate(f"undeclared predicate '{name}'", node.line, node.col)
        terms = []
        for term in node.items[1:]:
            if not isinstance(term, Symbol):
                raise PddlSyntaxError("nested term", term.line, term.col)
            if is_variable(term.text):
                if term.text not in variables:
                    raise PddlSyntaxError(f"unknown variable '{term.text}'", term.line, term.col)
            elif term.text not in self.constants:
                raise UndeclaredObject(f"undeclared constant '{term.text}'", term.line, term.col)
            terms.append(term.text)
        if len(terms) != schema.arity:
            raise ArityMismatch(
                f"predicate '{name}' expects {schema.arity} arguments, got {len(terms)}",
                node.line, node.col,
            )
        return (name,) + tuple(terms)

    def conjunction(self, node) -> List[SList]:
        node = _expect_list(node, "formula")
        if not node.items:
            return []
        if node.head() == "and":
            return [_expect_list(item, "literal") for item in node.items[1:]]
        return [node]

    def equality(self, node: SList, variables: Dict[str, str]) -> Tuple[str, str]:
        if len(node) != 3 or not all(isinstance(t, Symbol) for t in node.items[1:]):
            raise PddlSyntaxError("malformed equality", node.line, node.col)
        for term in node.items[1:]:
            if is_variable(term.text) and term.text not in variables:
                raise PddlSyntaxError(f"unknown variable '{term.text}'", term.line, term.col)
        return (node[1].text, node[2].text)

    def action_section(self, section: SList) -> None:
        if len(section) < 2 or not isinstance(section[1], Symbol):
            raise PddlSyntaxError("expected action name", section.line, section.col)
        name = section[1].text
        if name in self.actions:
            raise PddlSyntaxError(f"duplicate action '{name}'", section.line, section.col)
        fields: Dict[str, object] = {}
        items = section.items[2:]
        if len(items) % 2:
            raise PddlSyntaxError(f"malformed action '{name}'", section.line, section.col)
        for key, value in zip(items[::2], items[1::2]):
            if not isinstance(key, Symbol) or key.text not in (":parameters", ":precondition", ":effect"):
                raise PddlSyntaxError(f"unexpected field in action '{name}'", key.line, key.col)
            fields[key.text] = value

        params_node = fields.get(":parameters", SList((), section.line, section.col))
        pairs, bad = parse_typed_list(_expect_list(params_node, "parameter list").items)
        if bad is not None:
            raise PddlSyntaxError("malformed parameter list", bad.line, bad.col)
        variables: Dict[str, str] = {}
        for sym, type_name in pairs:
            if not is_variable(sym.text):
                raise PddlSyntaxError(f"expected variable, got '{sym.text}'", sym.line, sym.col)
            self.check_type(type_name, sym)
            variables[sym.text] = type_name

        pre_pos, pre_neg, eq_pos, eq_neg = [], [], [], []
        if ":precondition" in fields:
            for lit in self.conjunction(fields[":precondition"]):
                negated = lit.head() == "not"
                if negated:
                    if len(lit) != 2:
                        raise PddlSyntaxError("malformed negation", lit.line, lit.col)
                    lit = _expect_list(lit[1], "atom")
                if lit.head() == "=":
                    (eq_neg if negated else eq_pos).append(self.equality(lit, variables))
                elif lit.head() in ("or", "imply", "exists", "forall", "when"):
                    raise UnsupportedRequirement(
                        f"'{lit.head()}' is outside the supported STRIPS subset", lit.line, lit.col
                    )
                else:
                    (pre_neg if negated else pre_pos).append(self.atom(lit, variables))

        add, delete = [], []
        if ":effect" in fields:
            for lit in self.conjunction(fields[":effect"]):
                if lit.head() == "not":
                    if len(lit) != 2:
                        raise PddlSyntaxError("malformed negation", lit.line, lit.col)
                    delete.append(self.atom(_expect_list(lit[1], "atom"), variables))
                elif lit.head() in ("when", "forall", "increase", "decrease", "assign"):
                    raise UnsupportedRequirement(
                        f"'{lit.head()}' effects are outside the supported STRIPS subset", lit.line, lit.col
                    )
                else:
                    add.append(self.atom(lit, variables))

        self.actions[name] = ActionSchema(
            name=name,
            params=tuple((sym.text, t) for sym, t in pairs),
            pre_pos=tuple(pre_pos),
            pre_neg=tuple(pre_neg),
            eq_pos=tuple(eq_pos),
            eq_neg=tuple(eq_neg),
            add=tuple(add),
            delete=tuple(delete),
        )


def parse_domain(text: str, source: str = "<domain>") -> GpDomain:
    """Parse a PDDL domain in the supported subset into a resolved GpDomain."""
    try:
        nodes = parse_all(text)
        if len(nodes) != 1:
            raise PddlSyntaxError("expected exactly one (define ...) form", 1, 1)
        builder = _DomainBuilder(source)
        builder.name, sections = _sections(_expect_list(nodes[0], "(define ...)"), "domain")
        order = {":requirements": 0, ":types": 1, ":constants": 2, ":predicates": 3, ":action": 4}
        for section in sorted(sections, key=lambda s: order.get(s.head(), 5)):
            head = section.head()
            if head == ":requirements":
                builder.requirements_section(section)
            elif head == ":types":
                builder.types = _parse_types(section)
            elif head == ":constants":
                builder.constants_section(section)
            elif head == ":predicates":
                builder.predicates_section(section)
            elif head == ":action":
                builder.action_section(section)
            else:
                raise UnsupportedRequirement(f"unsupported domain section '{head}'", section.line, section.col)
    except PddlError as e:
        raise e.with_source(source)

    domain = GpDomain(
        name=builder.name,
        requirements=frozenset(builder.requirements),
        types=builder.types,
        constants=builder.constants,
        predicates=builder.predicates,
        actions=builder.actions,
        source_text=text,
    )
    logger.debug(f"Parsed domain '{domain.name}': {len(domain.predicates)} predicates, {len(domain.actions)} actions")
    return domain


def _ground_atom(node: SList, dom: GpDomain, objects: Dict[str, str]) -> Atom:
    if not node.items or not isinstance(node[0], Symbol):
        raise PddlSyntaxError("malformed atom", node.line, node.col)
    name = node[0].text
    schema = dom.predicates.get(name)
    if schema is None:
        raise UndeclaredPredicate(f"undeclared predicate '{name}'", node.line, node.col)
    args = []
    for term in node.items[1:]:
        if not isinstance(term, Symbol) or is_variable(term.text):
            raise PddlSyntaxError("expected object name", term.line, term.col)
        if term.text not in objects:
            raise UndeclaredObject(f"undeclared object '{term.text}'", term.line, term.col)
        args.append(term.text)
    if len(args) != schema.arity:
        raise ArityMismatch(
            f"predicate '{name}' expects {schema.arity} arguments, got {len(args)}", node.line, node.col
        )
    for arg, expected, term in zip(args, schema.param_types, node.items[1:]):
        if not dom.is_subtype(objects[arg], expected):
            raise TypeMismatch(
                f"object '{arg}' of type '{objects[arg]}' used where '{expected}' is expected",
                term.line, term.col,
            )
    return (name,) + tuple(args)


def parse_instance(text: str, dom: GpDomain, source: str = "<problem>") -> GpInstance:
    """Parse a PDDL problem against an already parsed domain."""
    try:
        nodes = parse_all(text)
        if len(nodes) != 1:
            raise PddlSyntaxError("expected exactly one (define ...) form", 1, 1)
        name, sections = _sections(_expect_list(nodes[0], "(define ...)"), "problem")
        objects: Dict[str, str] = dict(dom.constants)
        init: List[Atom] = []
        goal: List[Atom] = []
        by_head = {section.head(): section for section in sections}

        domain_ref = by_head.get(":domain")
        if domain_ref is not None:
            if len(domain_ref) != 2 or not isinstance(domain_ref[1], Symbol):
                raise PddlSyntaxError("malformed :domain", domain_ref.line, domain_ref.col)
            if domain_ref[1].text != dom.name:
                raise PddlError(
                    f"problem refers to domain '{domain_ref[1].text}', expected '{dom.name}'",
                    domain_ref.line, domain_ref.col,
                )

        if ":objects" in by_head:
            pairs, bad = parse_typed_list(by_head[":objects"].items[1:])
            if bad is not None:
                raise PddlSyntaxError("malformed :objects section", bad.line, bad.col)
            for sym, type_name in pairs:
                if not dom.has_type(type_name):
                    raise UndeclaredType(f"undeclared type '{type_name}'", sym.line, sym.col)
                objects[sym.text] = type_name

        if ":init" in by_head:
            for item in by_head[":init"].items[1:]:
                init.append(_ground_atom(_expect_list(item, "atom"), dom, objects))

        if ":goal" in by_head:
            goal_section = by_head[":goal"]
            if len(goal_section) > 2:
                raise PddlSyntaxError("malformed :goal", goal_section.line, goal_section.col)
            if len(goal_section) == 2:
                formula = _expect_list(goal_section[1], "goal formula")
                literals = [formula] if formula.head() != "and" else list(formula.items[1:])
                for lit in literals:
                    lit = _expect_list(lit, "goal atom")
                    if lit.head() == "not":
                        raise NegativeGoal("negative goal literals are not supported", lit.line, lit.col)
                    if lit.head() in ("or", "exists", "forall", "imply"):
                        raise UnsupportedRequirement(
                            f"'{lit.head()}' goals are outside the supported subset", lit.line, lit.col
                        )
                    goal.append(_ground_atom(lit, dom, objects))

        for head, section in by_head.items():
            if head not in (":domain", ":objects", ":init", ":goal"):
                raise UnsupportedRequirement(f"unsupported problem section '{head}'", section.line, section.col)
    except PddlError as e:
        raise e.with_source(source)

    return GpInstance(
        name=name,
        domain=dom,
        objects=objects,
        init=GroundState(frozenset(init)),
        goal=frozenset(goal),
        source_text=text,
    )


# Grounding

def _substitute(atoms: Iterable[Atom], binding: Dict[str, str]) -> FrozenSet[Atom]:
    return frozenset((atom[0],) + tuple(binding.get(t, t) for t in atom[1:]) for atom in atoms)


def _ground(inst: GpInstance) -> List[GroundAction]:
    result = []
    dom = inst.domain
    for name in sorted(dom.actions):
        schema = dom.actions[name]
        domains = [inst.objects_by_type.get(t, ()) for _, t in schema.params]
        for args in product(*domains):
            binding = dict(zip(schema.param_names, args))
            resolve = lambda term: binding.get(term, term)
            if any(resolve(a) != resolve(b) for a, b in schema.eq_pos):
                continue
            if any(resolve(a) == resolve(b) for a, b in schema.eq_neg):
                continue
            add = _substitute(schema.add, binding)
            result.append(GroundAction(
                schema=name,
                args=tuple(args),
                pre_pos=_substitute(schema.pre_pos, binding),
                pre_neg=_substitute(schema.pre_neg, binding),
                add=add,
                delete=_substitute(schema.delete, binding) - add,
            ))
    logger.debug(f"Grounded {len(result)} actions for instance '{inst.name}'")
    return result


def ground_actions(inst: GpInstance) -> Tuple[GroundAction, ...]:
    """All type-consistent groundings, ordered by schema name then arguments."""
    return inst.ground_actions


def find_ground_action(inst: GpInstance, schema: str, args: Sequence[str]) -> GroundAction:
    try:
        return inst.ground_index[(schema, tuple(args))]
    except KeyError:
        raise KeyError(f"no ground action {schema}({','.join(args)}) in instance '{inst.name}'")


def parse_plan(text: str, inst: GpInstance) -> Plan:
    """Read a plan written one ``(action arg ...)`` per line (VAL style)."""
    steps = []
    for node in parse_all(text):
        if not isinstance(node, SList) or not node.items:
            raise PddlSyntaxError("expected (action args...)", node.line, node.col)
        words = [str(item) for item in node.items]
        steps.append(find_ground_action(inst, words[0], words[1:]))
    return Plan(tuple(steps))


# Semantics

def applicable(s: GroundState, a: GroundAction) -> bool:
    atoms = s.atoms
    return a.pre_pos <= atoms and not (a.pre_neg & atoms)


def apply(s: GroundState, a: GroundAction) -> GroundState:
    """mu(s, a) = (s minus del) union add."""
    if not applicable(s, a):
        raise ActionNotApplicable(f"{a} is not applicable")
    return GroundState((s.atoms - a.delete) | a.add)


def holds_goal(s: GroundState, g: Iterable[Atom]) -> bool:
    return s.atoms.issuperset(g)


def applicable_actions(inst: GpInstance, s: GroundState) -> List[GroundAction]:
    return [a for a in inst.ground_actions if applicable(s, a)]


def validate_plan(inst: GpInstance, p: Plan, start: Optional[GroundState] = None) -> PlanCheck:
    """Replay ``p`` from ``start`` (default: the initial state).

    On failure ``failed_at`` is the first inapplicable step, or ``len(p)``
    when every step applies but the goal does not hold at the end.
    """
    state = inst.init if start is None else start
    for index, step in enumerate(p.steps):
        if not applicable(state, step):
            return PlanCheck(False, index)
        state = GroundState((state.atoms - step.delete) | step.add)
    if not holds_goal(state, inst.goal):
        return PlanCheck(False, len(p))
    return PlanCheck(True, None)


def bounded_goal_reachable(
    inst: GpInstance,
    s: GroundState,
    k: int,
    budget: int = BFS_NODE_BUDGET,
) -> bool:
    """True iff some action sequence of length <= k from ``s`` reaches the goal.

    Breadth-first search with duplicate detection; complete within the bound.
    Raises ResourceLimit once more than ``budget`` states were visited.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    goal = inst.goal
    if holds_goal(s, goal):
        return True
    unreachable = [atom for atom in goal if atom not in s.atoms and atom[0] not in inst.domain.added_predicates]
    if unreachable:
        return False

    frontier = [s]
    visited = {s}
    for _ in range(k):
        next_frontier = []
        for state in frontier:
            for action in inst.ground_actions:
                if not applicable(state, action):
                    continue
                child = GroundState((state.atoms - action.delete) | action.add)
                if child in visited:
                    continue
                if holds_goal(child, goal):
                    return True
                visited.add(child)
                if len(visited) > budget:
                    raise ResourceLimit(
                        f"bounded reachability exceeded {budget} visited states", budget, len(visited)
                    )
                next_frontier.append(child)
        if not next_frontier:
            break
        frontier = next_frontier
    return False


def shortest_plan(inst: GpInstance, s: Optional[GroundState] = None, k: int = 50,
                  budget: int = BFS_NODE_BUDGET) -> Optional[Plan]:
    """Breadth-first plan extraction, used by fixtures and diagnostics."""
    start = inst.init if s is None else s
    if holds_goal(start, inst.goal):
        return Plan()
    parents: Dict[GroundState, Tuple[Optional[GroundState], Optional[GroundAction]]] = {start: (None, None)}
    queue = deque([(start, 0)])
    while queue:
        state, depth = queue.popleft()
        if depth >= k:
            continue
        for action in inst.ground_actions:
            if not applicable(state, action):
                continue
            child = GroundState((state.atoms - action.delete) | action.add)
            if child in parents:
                continue
            parents[child] = (state, action)
            if len(parents) > budget:
                raise ResourceLimit(f"plan search exceeded {budget} states", budget, len(parents))
            if holds_goal(child, inst.goal):
                steps = []
                node: Optional[GroundState] = child
                while node is not None:
                    parent, via = parents[node]
                    if via is not None:
                        steps.append(via)
                    node = parent
                return Plan(tuple(reversed(steps)))
            queue.append((child, depth + 1))
    return None
