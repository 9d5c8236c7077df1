"""Plain-text ``.qnp`` listing used by ``solve-qnp`` and by feedback prompts.

::

    # comment
    vars: N:num H:bool A:bool G:bool
    init: N>0 !H !G
    goal: N=0 !H !A !G

    action Pick
    pre: N>0 !H A
    eff: H !A
    num: dec(N)

The first three non-comment lines declare variables, the initial and the
goal literals. Each action block starts with ``action NAME``; ``pre:``,
``eff:`` and ``num:`` lines are optional. Items may be separated by spaces
or commas.
"""

import re
from typing import Dict, List, Tuple

from pydantic import ValidationError

from absforge.app.errors import QnpFormatError
from absforge.planning.qnp_model import DEC, INC, QnpAction, QnpProblem, parse_literal


_NUM_EFFECT = re.compile(r"^(inc|dec)\s*(?:\(\s*([\w-]+)\s*\)|\s+([\w-]+))$", re.IGNORECASE)


def _items(text: str) -> List[str]:
    return [item for item in re.split(r"[,\s]+", text.strip()) if item]


def parse_num_effects(items: List[str]) -> Dict[str, str]:
    """Parse ``inc(X)`` / ``dec(X)`` (also ``dec X``) into {var: effect}."""
    joined = " ".join(items)
    parts = re.findall(r"(?:inc|dec)\s*\(\s*[\w-]+\s*\)|(?:inc|dec)\s+[\w-]+", joined, re.IGNORECASE)
    leftover = re.sub(r"(?:inc|dec)\s*\(\s*[\w-]+\s*\)|(?:inc|dec)\s+[\w-]+", "", joined, flags=re.IGNORECASE)
    if leftover.strip(" ,"):
        raise ValueError(f"malformed numerical effect '{leftover.strip()}'")
    effects: Dict[str, str] = {}
    for part in parts:
        match = _NUM_EFFECT.match(part.strip())
        op = match.group(1).lower()
        var = match.group(2) or match.group(3)
        if var in effects and effects[var] != op:
            raise ValueError(f"both inc and dec on '{var}'")
        effects[var] = INC if op == "inc" else DEC
    return effects


def _literal_map(items: List[str], line_no: int) -> Dict[str, bool]:
    result: Dict[str, bool] = {}
    for item in items:
        try:
            var, value, _ = parse_literal(item)
        except ValueError as e:
            raise QnpFormatError(str(e), line_no)
        if result.get(var, value) != value:
            raise QnpFormatError(f"inconsistent literals for '{var}'", line_no)
        result[var] = value
    return result


def _header(line: Tuple[int, str], key: str) -> str:
    line_no, text = line
    prefix = f"{key}:"
    if not text.lower().startswith(prefix):
        raise QnpFormatError(f"expected '{prefix}'", line_no)
    return text[len(prefix):]


def parse_qnp(text: str) -> QnpProblem:
    lines = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append((line_no, stripped))
    if len(lines) < 3:
        raise QnpFormatError("expected 'vars:', 'init:' and 'goal:' lines")

    bools: List[str] = []
    nums: List[str] = []
    for decl in _items(_header(lines[0], "vars")):
        name, _, kind = decl.partition(":")
        kind = kind.lower()
        if kind in ("num", "numeric", "numerical"):
            nums.append(name)
        elif kind in ("bool", "boolean", ""):
            bools.append(name)
        else:
            raise QnpFormatError(f"unknown variable kind '{kind}'", lines[0][0])

    init = _literal_map(_items(_header(lines[1], "init")), lines[1][0])
    goal = _literal_map(_items(_header(lines[2], "goal")), lines[2][0])

    actions: List[QnpAction] = []
    current = None
    for line_no, line in lines[3:]:
        key, _, rest = line.partition(" ")
        if key.lower() == "action":
            if not rest.strip():
                raise QnpFormatError("action without a name", line_no)
            current = {"name": rest.strip(), "line": line_no}
            actions.append(current)
            continue
        if current is None:
            raise QnpFormatError("expected 'action NAME'", line_no)
        field, sep, value = line.partition(":")
        field = field.strip().lower()
        if not sep or field not in ("pre", "eff", "num"):
            raise QnpFormatError(f"unexpected line '{line}'", line_no)
        if field in current:
            raise QnpFormatError(f"duplicate '{field}:' line", line_no)
        if field == "num":
            try:
                current[field] = parse_num_effects(_items(value))
            except ValueError as e:
                raise QnpFormatError(str(e), line_no)
        else:
            current[field] = _literal_map(_items(value), line_no)

    built = []
    for block in actions:
        try:
            built.append(QnpAction(
                name=block["name"],
                pre=block.get("pre", {}),
                bool_eff=block.get("eff", {}),
                num_eff=block.get("num", {}),
            ))
        except ValidationError as e:
            raise QnpFormatError(e.errors()[0]["msg"], block["line"])
    try:
        return QnpProblem(bools=tuple(bools), nums=tuple(nums), actions=tuple(built), init=init, goal=goal)
    except ValidationError as e:
        raise QnpFormatError(e.errors()[0]["msg"])


def format_qnp(P: QnpProblem) -> str:
    decls = [f"{v}:num" for v in P.nums] + [f"{v}:bool" for v in P.bools]
    out = [
        "vars: " + " ".join(decls),
        "init: " + " ".join(P.render_literals(P.init)),
        "goal: " + " ".join(P.render_literals(P.goal)),
    ]
    for action in P.actions:
        rendered = action.render(P.nums)
        out.append("")
        out.append(f"action {action.name}")
        out.append("pre: " + " ".join(rendered["pre"]))
        out.append("eff: " + " ".join(rendered["bool_eff"]))
        out.append("num: " + " ".join(rendered["num_eff"]))
    return "\n".join(line.rstrip() for line in out) + "\n"
