"""
formula.py

Polymodal formulas: AST, parser, printer, JSON form, and the M / M+ reduction
that turns GLP-provability into J-provability.

Also houses the one neighborhood-semantics evaluator shared by Kripke frames
and finite polytopological spaces: sets are int bitmasks and each modality n
is given by its diamond operator delta_n.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError
from pydantic import BaseModel, ValidationError, model_validator

from errors import ParseError


class Formula:
    """Base of the formula AST. Subclasses are frozen dataclasses."""

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True, eq=True)
class Top(Formula):
    """The constant true; evaluates like ~false but prints as written."""


@dataclass(frozen=True, eq=True)
class Var(Formula):
    name: str


@dataclass(frozen=True, eq=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, eq=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=True)
class Box(Formula):
    n: int
    arg: Formula


@dataclass(frozen=True, eq=True)
class Diamond(Formula):
    n: int
    arg: Formula


BOTTOM = Bottom()
TRUE = Top()


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

FORMULA_GRAMMAR = r"""
?start: implication

?implication: disjunction
    | disjunction IMPLIES implication   -> implies

?disjunction: conjunction
    | disjunction OR conjunction        -> or_

?conjunction: unary
    | conjunction AND unary             -> and_

?unary: atom
    | NOT unary                         -> not_
    | "[" INDEX "]" unary               -> box
    | "<" INDEX ">" unary               -> diamond

?atom: VAR                              -> var
    | FALSE                             -> bottom
    | TRUE                              -> top
    | "(" implication ")"

IMPLIES: "->" | "→"
OR: "|" | "∨"
AND: "&" | "∧"
NOT: "~" | "¬"
FALSE: "false" | "⊥"
TRUE: "true"
VAR: /[pqr][0-9]*/
INDEX: /-?[0-9]+(\.[0-9]+)?/

%import common.WS
%ignore WS
"""


def _modal_index(token) -> int:
    text = str(token)
    if "." in text or text.startswith("-"):
        raise ParseError(f"modal index must be a nonnegative integer, got {text!r}", position=token.start_pos)
    return int(text)


@v_args(inline=True)
class _FormulaBuilder(Transformer):
    def implies(self, left, _op, right):
        return Implies(left, right)

    def or_(self, left, _op, right):
        return Or(left, right)

    def and_(self, left, _op, right):
        return And(left, right)

    def not_(self, _op, arg):
        return Not(arg)

    def box(self, index, arg):
        return Box(_modal_index(index), arg)

    def diamond(self, index, arg):
        return Diamond(_modal_index(index), arg)

    def var(self, token):
        return Var(str(token))

    def bottom(self, _token):
        return BOTTOM

    def top(self, _token):
        return TRUE


_parser = Lark(FORMULA_GRAMMAR, parser="lalr")


def parse(text: str) -> Formula:
    """Parse formula text. Raises ParseError with a character offset."""
    try:
        tree = _parser.parse(text)
    except UnexpectedInput as e:
        raise ParseError.from_lark(e, text) from e
    try:
        return _FormulaBuilder().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, ParseError):
            raise ParseError(e.orig_exc.reason, text, e.orig_exc.position) from e
        raise


# ---------------------------------------------------------------------------
# Printing (minimal parentheses)
# ---------------------------------------------------------------------------

_IMPLIES, _OR, _AND, _UNARY, _ATOM = 1, 2, 3, 4, 5


def _render(f: Formula) -> Tuple[str, int]:
    if isinstance(f, Bottom):
        return "false", _ATOM
    if isinstance(f, Var):
        return f.name, _ATOM
    if isinstance(f, Top):
        return "true", _ATOM
    if isinstance(f, Not):
        return "~" + _wrap(f.arg, _UNARY), _UNARY
    if isinstance(f, Box):
        return f"[{f.n}]" + _wrap(f.arg, _UNARY), _UNARY
    if isinstance(f, Diamond):
        return f"<{f.n}>" + _wrap(f.arg, _UNARY), _UNARY
    if isinstance(f, And):
        return f"{_wrap(f.left, _AND)} & {_wrap(f.right, _UNARY)}", _AND
    if isinstance(f, Or):
        return f"{_wrap(f.left, _OR)} | {_wrap(f.right, _AND)}", _OR
    if isinstance(f, Implies):
        return f"{_wrap(f.left, _OR)} -> {_wrap(f.right, _IMPLIES)}", _IMPLIES
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f: Formula, context: int) -> str:
    text, precedence = _render(f)
    return f"({text})" if precedence < context else text


def to_text(f: Formula) -> str:
    return _render(f)[0]


# ---------------------------------------------------------------------------
# JSON form
# ---------------------------------------------------------------------------

class Op(str, Enum):
    BOT = "bot"
    TOP = "top"
    VAR = "var"
    NOT = "not"
    AND = "and"
    OR = "or"
    IMPLIES = "implies"
    BOX = "box"
    DIAMOND = "diamond"


class FormulaDocument(BaseModel):
    """Tagged JSON object for a formula node."""
    op: Op
    name: Optional[str] = None
    n: Optional[int] = None
    arg: Optional["FormulaDocument"] = None
    left: Optional["FormulaDocument"] = None
    right: Optional["FormulaDocument"] = None

    @model_validator(mode="after")
    def _check_shape(self) -> "FormulaDocument":
        if self.op == Op.VAR and not self.name:
            raise ValueError("var node needs a name")
        if self.op in (Op.BOX, Op.DIAMOND) and (self.n is None or self.n < 0):
            raise ValueError(f"{self.op.value} node needs a nonnegative index n")
        if self.op in (Op.NOT, Op.BOX, Op.DIAMOND) and self.arg is None:
            raise ValueError(f"{self.op.value} node needs arg")
        if self.op in (Op.AND, Op.OR, Op.IMPLIES) and (self.left is None or self.right is None):
            raise ValueError(f"{self.op.value} node needs left and right")
        return self

    def to_formula(self) -> Formula:
        if self.op == Op.BOT:
            return BOTTOM
        if self.op == Op.TOP:
            return TRUE
        if self.op == Op.VAR:
            return Var(self.name)
        if self.op == Op.NOT:
            return Not(self.arg.to_formula())
        if self.op == Op.BOX:
            return Box(self.n, self.arg.to_formula())
        if self.op == Op.DIAMOND:
            return Diamond(self.n, self.arg.to_formula())
        binary = {Op.AND: And, Op.OR: Or, Op.IMPLIES: Implies}[self.op]
        return binary(self.left.to_formula(), self.right.to_formula())


def to_json(f: Formula) -> dict:
    if isinstance(f, Bottom):
        return {"op": "bot"}
    if isinstance(f, Top):
        return {"op": "top"}
    if isinstance(f, Var):
        return {"op": "var", "name": f.name}
    if isinstance(f, Not):
        return {"op": "not", "arg": to_json(f.arg)}
    if isinstance(f, (Box, Diamond)):
        return {"op": "box" if isinstance(f, Box) else "diamond", "n": f.n, "arg": to_json(f.arg)}
    tag = {And: "and", Or: "or", Implies: "implies"}[type(f)]
    return {"op": tag, "left": to_json(f.left), "right": to_json(f.right)}


def from_json(obj: dict) -> Formula:
    try:
        return FormulaDocument.model_validate(obj).to_formula()
    except ValidationError as e:
        raise ParseError(f"invalid formula document: {e.errors()[0]['msg']}") from e


# ---------------------------------------------------------------------------
# Structure
# ---------------------------------------------------------------------------

def children(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, (Not, Box, Diamond)):
        return (f.arg,)
    if isinstance(f, (And, Or, Implies)):
        return (f.left, f.right)
    return ()


def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in children(f))


def subformulas(f: Formula) -> List[Formula]:
    """Distinct subformulas in post-order; f itself comes last."""
    seen: Dict[Formula, None] = {}

    def visit(g: Formula) -> None:
        for c in children(g):
            visit(c)
        seen.setdefault(g, None)

    visit(f)
    return list(seen)


def variables(f: Formula) -> List[str]:
    return sorted({g.name for g in subformulas(f) if isinstance(g, Var)})


def max_modality(f: Formula) -> Optional[int]:
    indices = [g.n for g in subformulas(f) if isinstance(g, (Box, Diamond))]
    return max(indices) if indices else None


def conjoin(parts: Sequence[Formula]) -> Formula:
    """Left-folded conjunction; the empty conjunction is true."""
    if not parts:
        return TRUE
    result = parts[0]
    for part in parts[1:]:
        result = And(result, part)
    return result


# ---------------------------------------------------------------------------
# The M / M+ reduction
# ---------------------------------------------------------------------------

def boxes_only(f: Formula) -> Formula:
    """Rewrite every <n>g as ~[n]~g."""
    if isinstance(f, Diamond):
        return Not(Box(f.n, Not(boxes_only(f.arg))))
    if isinstance(f, Not):
        return Not(boxes_only(f.arg))
    if isinstance(f, Box):
        return Box(f.n, boxes_only(f.arg))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(boxes_only(f.left), boxes_only(f.right))
    return f


def box_subformulas(f: Formula) -> List[Tuple[int, Formula]]:
    """Distinct [m]g subformulas of the box-only form of f, outermost first."""
    found: Dict[Tuple[int, Formula], None] = {}

    def visit(g: Formula) -> None:
        if isinstance(g, Box):
            found.setdefault((g.n, g.arg), None)
        for c in children(g):
            visit(c)

    visit(boxes_only(f))
    return list(found)


def m_formula(f: Formula) -> Formula:
    boxes = box_subformulas(f)
    if not boxes:
        return TRUE
    top = max(m for m, _ in boxes)
    return conjoin([
        Implies(Box(m, body), Box(k, body))
        for m, body in boxes
        for k in range(m + 1, top + 1)
    ])


def m_plus(f: Formula) -> Formula:
    boxes = box_subformulas(f)
    top = max((m for m, _ in boxes), default=0)
    m = m_formula(f)
    return conjoin([m] + [Box(k, m) for k in range(top + 1)])


def reduction_target(f: Formula) -> Formula:
    """M+(f) -> f: J proves this iff GLP proves f."""
    return Implies(m_plus(f), f)


# ---------------------------------------------------------------------------
# Neighborhood semantics over bitmasks
# ---------------------------------------------------------------------------

Diamonds = Callable[[int, int], int]


@dataclass(frozen=True)
class Program:
    """Straight-line evaluation order over the distinct subformulas of a formula."""
    nodes: Tuple[Formula, ...]
    steps: Tuple[Tuple[str, int, int, object], ...]


def compile_formula(f: Formula) -> Program:
    nodes = subformulas(f)
    index = {g: i for i, g in enumerate(nodes)}
    steps = []
    for g in nodes:
        if isinstance(g, Bottom):
            steps.append(("bot", -1, -1, None))
        elif isinstance(g, Top):
            steps.append(("top", -1, -1, None))
        elif isinstance(g, Var):
            steps.append(("var", -1, -1, g.name))
        elif isinstance(g, Not):
            steps.append(("not", index[g.arg], -1, None))
        elif isinstance(g, Box):
            steps.append(("box", index[g.arg], -1, g.n))
        elif isinstance(g, Diamond):
            steps.append(("diamond", index[g.arg], -1, g.n))
        else:
            tag = {And: "and", Or: "or", Implies: "implies"}[type(g)]
            steps.append((tag, index[g.left], index[g.right], None))
    return Program(tuple(nodes), tuple(steps))


def truth_sets(program: Program, full: int, valuation: Mapping[str, int], diamond: Diamonds) -> List[int]:
    """
    Truth set of every node of `program`, aligned with program.nodes.

    [n]A is the complement of delta_n of the complement of A.
    """
    values: List[int] = []
    for tag, a, b, extra in program.steps:
        if tag == "bot":
            value = 0
        elif tag == "top":
            value = full
        elif tag == "var":
            value = valuation.get(extra, 0) & full
        elif tag == "not":
            value = full & ~values[a]
        elif tag == "and":
            value = values[a] & values[b]
        elif tag == "or":
            value = values[a] | values[b]
        elif tag == "implies":
            value = (full & ~values[a]) | values[b]
        elif tag == "diamond":
            value = diamond(extra, values[a])
        else:
            value = full & ~diamond(extra, full & ~values[a])
        values.append(value)
    return values


def evaluate(f: Formula, full: int, valuation: Mapping[str, int], diamond: Diamonds) -> int:
    return truth_sets(compile_formula(f), full, valuation, diamond)[-1]
