"""S-expression reader shared by the PDDL parser and the feature language.

Symbols are lower-cased (PDDL is case-insensitive). Every node keeps the
line/column where it starts so that errors can point at the source.
"""

from dataclasses import dataclass
from typing import List, Union

from absforge.app.errors import PddlSyntaxError


@dataclass(frozen=True)
class Symbol:
    text: str
    line: int
    col: int

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int
    col: int

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, index):
        return self.items[index]

    def head(self) -> str:
        """Text of the first symbol, or '' for an empty list or nested head."""
        if self.items and isinstance(self.items[0], Symbol):
            return self.items[0].text
        return ""

    def __str__(self) -> str:
        return "(" + " ".join(str(item) for item in self.items) + ")"


Node = Union[Symbol, SList]


def tokenize(text: str):
    """Yield (token, line, col); comments start with ';' and run to end of line."""
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch.isspace():
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield ch, line, col
            col += 1
            i += 1
        else:
            start, start_col = i, col
            while i < n and not text[i].isspace() and text[i] not in "();":
                i += 1
                col += 1
            yield text[start:i].lower(), line, start_col


def parse_all(text: str) -> List[Node]:
    """Parse every top-level expression in ``text``."""
    stack: List[list] = [[]]
    positions: List[tuple] = []
    for token, line, col in tokenize(text):
        if token == "(":
            stack.append([])
            positions.append((line, col))
        elif token == ")":
            if len(stack) == 1:
                raise PddlSyntaxError("unexpected ')'", line, col)
            items = stack.pop()
            start_line, start_col = positions.pop()
            stack[-1].append(SList(tuple(items), start_line, start_col))
        else:
            stack[-1].append(Symbol(token, line, col))
    if len(stack) > 1:
        line, col = positions[-1]
        raise PddlSyntaxError("unbalanced '(' (missing ')')", line, col)
    return stack[0]


def parse_one(text: str) -> Node:
    """Parse exactly one expression."""
    nodes = parse_all(text)
    if not nodes:
        raise PddlSyntaxError("empty input", 1, 1)
    if len(nodes) > 1:
        extra = nodes[1]
        raise PddlSyntaxError("unexpected trailing input", extra.line, extra.col)
    return nodes[0]


def parse_typed_list(items, default_type: str = "object"):
    """Parse ``a b - t1 c - t2 d`` into [(name, type), ...] preserving order.

    Returns (pairs, error_node) where error_node is set on malformed input.
    """
    pairs = []
    pending: List[Symbol] = []
    it = list(items)
    i = 0
    while i < len(it):
        item = it[i]
        if not isinstance(item, Symbol):
            return pairs, item
        if item.text == "-":
            if i + 1 >= len(it) or not isinstance(it[i + 1], Symbol) or not pending:
                return pairs, item
            type_name = it[i + 1].text
            pairs.extend((sym, type_name) for sym in pending)
            pending = []
            i += 2
            continue
        pending.append(item)
        i += 1
    pairs.extend((sym, default_type) for sym in pending)
    return pairs, None
