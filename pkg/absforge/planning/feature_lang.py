"""Feature language: closed first-order formulas and counting terms over LL states.

Grammar (s-expressions, PDDL-like)::

    f     := atom | (= term term) | (not f) | (and f*) | (or f*)
           | (exists (tvar+) f) | (forall (tvar+) f)
    count := (count (tvar+) f)
    tvar  := ?name | ?name - typename
    atom  := (pred term*)
    term  := ?name | objectname

Untyped variables range over all objects; a typed variable ranges over the
objects of that type and of its subtypes.
"""

import logging
from dataclasses import dataclass
from itertools import product
from typing import Dict, FrozenSet, Iterator, Mapping, Optional, Sequence, Tuple, Union

from absforge.app.errors import (
    FormulaArityMismatch,
    FormulaSyntaxError,
    PddlSyntaxError,
    UnboundVariable,
    UnknownPredicate,
    UnknownType,
)
from absforge.planning.pddl_core import ROOT_TYPE, GpDomain, GpInstance, GroundState, is_variable
from absforge.planning.sexpr import SList, Symbol, parse_one, parse_typed_list


logger = logging.getLogger(__name__)

TypedVar = Tuple[str, str]  # (?name, type)
ObjectsByType = Mapping[str, Sequence[str]]


@dataclass(frozen=True)
class Atom:
    predicate: str
    terms: Tuple[str, ...]

    def __str__(self) -> str:
        return "(" + " ".join((self.predicate,) + self.terms) + ")"


@dataclass(frozen=True)
class Equals:
    left: str
    right: str

    def __str__(self) -> str:
        return f"(= {self.left} {self.right})"


@dataclass(frozen=True)
class Not:
    body: "Formula"

    def __str__(self) -> str:
        return f"(not {self.body})"


@dataclass(frozen=True)
class And:
    parts: Tuple["Formula", ...] = ()

    def __str__(self) -> str:
        return "(and" + "".join(" " + str(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class Or:
    parts: Tuple["Formula", ...] = ()

    def __str__(self) -> str:
        return "(or" + "".join(" " + str(p) for p in self.parts) + ")"


def _render_vars(variables: Tuple[TypedVar, ...]) -> str:
    # an untyped name before a typed one would inherit its type on reparse
    if all(t == ROOT_TYPE for _, t in variables):
        return "(" + " ".join(name for name, _ in variables) + ")"
    return "(" + " ".join(f"{name} - {t}" for name, t in variables) + ")"


@dataclass(frozen=True)
class Exists:
    variables: Tuple[TypedVar, ...]
    body: "Formula"

    def __str__(self) -> str:
        return f"(exists {_render_vars(self.variables)} {self.body})"


@dataclass(frozen=True)
class Forall:
    variables: Tuple[TypedVar, ...]
    body: "Formula"

    def __str__(self) -> str:
        return f"(forall {_render_vars(self.variables)} {self.body})"


Formula = Union[Atom, Equals, Not, And, Or, Exists, Forall]


@dataclass(frozen=True)
class CountingTerm:
    """#x. body(x): number of distinct tuples over ``variables`` satisfying ``body``."""
    variables: Tuple[TypedVar, ...]
    body: Formula

    def __str__(self) -> str:
        return f"(count {_render_vars(self.variables)} {self.body})"


BOOLEAN = "boolean"
NUMERICAL = "numerical"


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str  # BOOLEAN or NUMERICAL
    definition: Union[Formula, CountingTerm]

    def __post_init__(self):
        if self.kind not in (BOOLEAN, NUMERICAL):
            raise ValueError(f"feature {self.name}: unknown kind '{self.kind}'")
        if (self.kind == NUMERICAL) != isinstance(self.definition, CountingTerm):
            raise ValueError(f"feature {self.name}: kind '{self.kind}' does not match its definition")


# Parsing

class _FormulaParser:
    def __init__(self, dom: Optional[GpDomain]):
        self.dom = dom

    def typed_vars(self, node) -> Tuple[TypedVar, ...]:
        if not isinstance(node, SList) or not node.items:
            raise FormulaSyntaxError(f"expected a non-empty variable list at {node.line}:{node.col}")
        pairs, bad = parse_typed_list(node.items, default_type=ROOT_TYPE)
        if bad is not None:
            raise FormulaSyntaxError(f"malformed variable list at {bad.line}:{bad.col}")
        result = []
        for sym, type_name in pairs:
            if not is_variable(sym.text):
                raise FormulaSyntaxError(f"expected variable, got '{sym.text}' at {sym.line}:{sym.col}")
            if self.dom is not None and not self.dom.has_type(type_name):
                raise UnknownType(f"unknown type '{type_name}' at {sym.line}:{sym.col}")
            result.append((sym.text, type_name))
        return tuple(result)

    def term(self, node, bound: FrozenSet[str]) -> str:
        if not isinstance(node, Symbol):
            raise FormulaSyntaxError(f"expected a term at {node.line}:{node.col}")
        if is_variable(node.text) and node.text not in bound:
            raise UnboundVariable(f"unbound variable '{node.text}' at {node.line}:{node.col}")
        return node.text

    def formula(self, node, bound: FrozenSet[str]) -> Formula:
        if not isinstance(node, SList):
            raise FormulaSyntaxError(f"expected '(' at {node.line}:{node.col}, got '{node.text}'")
        if not node.items:
            raise FormulaSyntaxError(f"empty formula at {node.line}:{node.col}")
        head = node.head()
        if not head:
            raise FormulaSyntaxError(f"expected operator or predicate at {node.line}:{node.col}")
        args = node.items[1:]
        if head == "and":
            return And(tuple(self.formula(a, bound) for a in args))
        if head == "or":
            return Or(tuple(self.formula(a, bound) for a in args))
        if head == "not":
            if len(args) != 1:
                raise FormulaSyntaxError(f"'not' takes one argument at {node.line}:{node.col}")
            return Not(self.formula(args[0], bound))
        if head in ("exists", "forall"):
            if len(args) != 2:
                raise FormulaSyntaxError(f"'{head}' takes a variable list and a body at {node.line}:{node.col}")
            variables = self.typed_vars(args[0])
            body = self.formula(args[1], bound | {name for name, _ in variables})
            return Exists(variables, body) if head == "exists" else Forall(variables, body)
        if head == "=":
            if len(args) != 2:
                raise FormulaSyntaxError(f"'=' takes two terms at {node.line}:{node.col}")
            return Equals(self.term(args[0], bound), self.term(args[1], bound))
        if head == "count":
            raise FormulaSyntaxError(f"nested counting term at {node.line}:{node.col}")
        terms = tuple(self.term(a, bound) for a in args)
        if self.dom is not None:
            schema = self.dom.predicates.get(head)
            if schema is None:
                raise UnknownPredicate(f"unknown predicate '{head}' at {node.line}:{node.col}")
            if schema.arity != len(terms):
                raise FormulaArityMismatch(
                    f"predicate '{head}' expects {schema.arity} arguments, got {len(terms)} "
                    f"at {node.line}:{node.col}"
                )
        return Atom(head, terms)


def _read(text: str):
    try:
        return parse_one(text)
    except PddlSyntaxError as e:
        raise FormulaSyntaxError(str(e.message) + f" at {e.line}:{e.col}")


def parse_formula(text: str, dom: Optional[GpDomain] = None, free_vars: Sequence[str] = ()) -> Formula:
    """Parse a formula; variables other than ``free_vars`` must be quantified."""
    return _FormulaParser(dom).formula(_read(text), frozenset(free_vars))


def parse_count(text: str, dom: Optional[GpDomain] = None) -> CountingTerm:
    node = _read(text)
    if not isinstance(node, SList) or node.head() != "count" or len(node) != 3:
        raise FormulaSyntaxError("expected (count (?x ...) body)")
    parser = _FormulaParser(dom)
    variables = parser.typed_vars(node[1])
    body = parser.formula(node[2], frozenset(name for name, _ in variables))
    return CountingTerm(variables, body)


def parse_feature(name: str, kind: str, text: str, dom: Optional[GpDomain] = None) -> Feature:
    if kind == NUMERICAL:
        return Feature(name, kind, parse_count(text, dom))
    if kind == BOOLEAN:
        return Feature(name, kind, parse_formula(text, dom))
    raise ValueError(f"feature {name}: unknown kind '{kind}'")


# Evaluation

def _bindings(variables: Tuple[TypedVar, ...], objs: ObjectsByType) -> Iterator[Tuple[str, ...]]:
    return product(*(objs.get(t, ()) for _, t in variables))


def eval_formula(f: Formula, s: GroundState, objs: ObjectsByType, env: Optional[Dict[str, str]] = None) -> bool:
    """Finite-model truth of ``f`` in ``s`` (closed world) under binding ``env``."""
    env = env or {}
    atoms = s.atoms
    if isinstance(f, Atom):
        return (f.predicate,) + tuple(env.get(t, t) for t in f.terms) in atoms
    if isinstance(f, And):
        return all(eval_formula(p, s, objs, env) for p in f.parts)
    if isinstance(f, Or):
        return any(eval_formula(p, s, objs, env) for p in f.parts)
    if isinstance(f, Not):
        return not eval_formula(f.body, s, objs, env)
    if isinstance(f, Equals):
        return env.get(f.left, f.left) == env.get(f.right, f.right)
    if isinstance(f, (Exists, Forall)):
        names = [name for name, _ in f.variables]
        want = isinstance(f, Exists)
        for values in _bindings(f.variables, objs):
            inner = dict(env)
            inner.update(zip(names, values))
            if eval_formula(f.body, s, objs, inner) == want:
                return want
        return not want
    raise TypeError(f"not a formula: {f!r}")


def eval_count(t: CountingTerm, s: GroundState, objs: ObjectsByType) -> int:
    names = [name for name, _ in t.variables]
    # product() over typed domains never repeats a tuple, so this counts distinct tuples
    return sum(1 for values in _bindings(t.variables, objs) if eval_formula(t.body, s, objs, dict(zip(names, values))))


def _objects(objs: Union[GpInstance, ObjectsByType]) -> ObjectsByType:
    return objs.objects_by_type if isinstance(objs, GpInstance) else objs


def eval_feature(feat: Feature, s: GroundState, objs: Union[GpInstance, ObjectsByType]) -> Union[bool, int]:
    objects = _objects(objs)
    if feat.kind == NUMERICAL:
        return eval_count(feat.definition, s, objects)
    return eval_formula(feat.definition, s, objects, {})


# Syntactic helpers

def predicates_of(f: Union[Formula, CountingTerm]) -> FrozenSet[str]:
    """Predicate names mentioned anywhere in ``f``."""
    if isinstance(f, Atom):
        return frozenset({f.predicate})
    if isinstance(f, (And, Or)):
        return frozenset().union(*(predicates_of(p) for p in f.parts))
    if isinstance(f, (Not, Exists, Forall, CountingTerm)):
        return predicates_of(f.body)
    return frozenset()


def free_variables(f: Formula) -> FrozenSet[str]:
    if isinstance(f, Atom):
        return frozenset(t for t in f.terms if is_variable(t))
    if isinstance(f, Equals):
        return frozenset(t for t in (f.left, f.right) if is_variable(t))
    if isinstance(f, (And, Or)):
        return frozenset().union(*(free_variables(p) for p in f.parts))
    if isinstance(f, Not):
        return free_variables(f.body)
    if isinstance(f, (Exists, Forall)):
        return free_variables(f.body) - {name for name, _ in f.variables}
    raise TypeError(f"not a formula: {f!r}")


def is_negation_free(f: Formula) -> bool:
    if isinstance(f, Not):
        return False
    if isinstance(f, (And, Or)):
        return all(is_negation_free(p) for p in f.parts)
    if isinstance(f, (Exists, Forall)):
        return is_negation_free(f.body)
    return True
