"""A small XPath subset for reading, and the write-path language used by the
XML output backend.

Supported read syntax::

    expr      := branch ("|" branch)*
    branch    := "/"? step ("/" step)*
    step      := (axis "::")? nametest predicate* | "@" nametest predicate*
    axis      := child | descendant-or-self | self | attribute
    nametest  := "*" | NAME | PREFIX:NAME
    predicate := "[" contains(text(), LIT) "]"
               | "[" text() = LIT "]"
               | "[" starts-with(text(), LIT) "]"

Name tests compare the qualified name as written (prefix-literal). Inside
predicates ``text()`` stands for the node's full descendant text.
Absolute branches start from a virtual root whose children are the context
nodes, so ``/text:p`` selects the context nodes named ``text:p``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .docmodel import ATTRIBUTE, ELEMENT, Fragment, Node, text_of
from .errors import PathSyntaxError

CHILD = "child"
DESCENDANT_OR_SELF = "descendant-or-self"
SELF = "self"
ATTRIBUTE_AXIS = "attribute"
AXES = (CHILD, DESCENDANT_OR_SELF, SELF, ATTRIBUTE_AXIS)

CONTAINS = "contains-text"
EQUALS = "text-equals"
STARTS_WITH = "starts-with-text"


@dataclass(frozen=True)
class Predicate:
    kind: str
    literal: str

    def holds(self, node: Node) -> bool:
        text = text_of(node)
        if self.kind == CONTAINS:
            return self.literal in text
        if self.kind == EQUALS:
            return text == self.literal
        return text.startswith(self.literal)


@dataclass(frozen=True)
class Step:
    axis: str
    test: str  # "*" or a qualified name
    predicates: tuple[Predicate, ...] = ()

    def matches(self, node: Node) -> bool:
        if self.axis == ATTRIBUTE_AXIS:
            if node.kind != ATTRIBUTE:
                return False
        elif node.kind != ELEMENT:
            return False
        if self.test != "*" and node.name != self.test:
            return False
        return all(p.holds(node) for p in self.predicates)


@dataclass(frozen=True)
class Branch:
    steps: tuple[Step, ...]
    absolute: bool = False


@dataclass(frozen=True)
class PathExpr:
    branches: tuple[Branch, ...]
    source: str = ""

    def __str__(self) -> str:
        return self.source


@dataclass(frozen=True)
class WritePath:
    steps: tuple[str, ...]
    attribute: str | None = None

    @property
    def ends_in_element(self) -> bool:
        return self.attribute is None


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<axis_sep>::)
  | (?P<literal>'[^']*'|"[^"]*")
  | (?P<name>[A-Za-z_][\w.\-]*(?::[A-Za-z_][\w.\-]*)?)
  | (?P<punct>[/|@\[\](),=*])
  | (?P<other>.)
    """,
    re.VERBOSE,
)


def _tokenize(expr: str) -> list[tuple[str, str]]:
    tokens = []
    for m in _TOKEN.finditer(expr):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "other":
            raise PathSyntaxError(f"unexpected character {m.group()!r}", expr, m.group())
        tokens.append((kind, m.group()))
    return tokens


class _Parser:
    def __init__(self, expr: str) -> None:
        self.expr = expr
        self.tokens = _tokenize(expr)
        self.pos = 0

    def peek(self, offset: int = 0) -> tuple[str, str] | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def error(self, message: str):
        tok = self.peek()
        if tok is None:
            raise PathSyntaxError(f"{message}, got end of expression", self.expr)
        raise PathSyntaxError(f"{message}, got {tok[1]!r}", self.expr, tok[1])

    def take(self, value: str) -> None:
        tok = self.peek()
        if tok is None or tok[1] != value:
            self.error(f"expected {value!r}")
        self.pos += 1

    def parse(self) -> PathExpr:
        if not self.tokens:
            raise PathSyntaxError("empty expression", self.expr)
        branches = [self.branch()]
        while self.peek() and self.peek()[1] == "|":
            self.pos += 1
            branches.append(self.branch())
        if self.peek() is not None:
            self.error("unexpected token")
        return PathExpr(tuple(branches), self.expr)

    def branch(self) -> Branch:
        absolute = False
        if self.peek() and self.peek()[1] == "/":
            absolute = True
            self.pos += 1
        steps = [self.step()]
        while self.peek() and self.peek()[1] == "/":
            self.pos += 1
            steps.append(self.step())
        return Branch(tuple(steps), absolute)

    def step(self) -> Step:
        tok = self.peek()
        axis = CHILD
        if tok is None:
            self.error("expected a step")
        if tok[1] == "@":
            self.pos += 1
            axis = ATTRIBUTE_AXIS
        elif tok[0] == "name" and self.peek(1) and self.peek(1)[0] == "axis_sep":
            if tok[1] not in AXES:
                raise PathSyntaxError(f"unsupported axis {tok[1]!r}", self.expr, tok[1])
            axis = tok[1]
            self.pos += 2
        test = self.name_test()
        predicates = []
        while self.peek() and self.peek()[1] == "[":
            predicates.append(self.predicate())
        return Step(axis, test, tuple(predicates))

    def name_test(self) -> str:
        tok = self.peek()
        if tok is None or not (tok[0] == "name" or tok[1] == "*"):
            self.error("expected a name test")
        if tok[0] == "name" and self.peek(1) and self.peek(1)[1] == "(":
            raise PathSyntaxError(f"unsupported node test {tok[1]}()", self.expr, tok[1])
        self.pos += 1
        return tok[1]

    def text_call(self) -> None:
        self.take("text")
        self.take("(")
        self.take(")")

    def literal(self) -> str:
        tok = self.peek()
        if tok is None or tok[0] != "literal":
            self.error("expected a string literal")
        self.pos += 1
        return tok[1][1:-1]

    def predicate(self) -> Predicate:
        self.take("[")
        tok = self.peek()
        if tok is None:
            self.error("expected a predicate")
        if tok[1] in ("contains", "starts-with"):
            self.pos += 1
            self.take("(")
            self.text_call()
            self.take(",")
            lit = self.literal()
            self.take(")")
            pred = Predicate(CONTAINS if tok[1] == "contains" else STARTS_WITH, lit)
        elif tok[1] == "text":
            self.text_call()
            self.take("=")
            pred = Predicate(EQUALS, self.literal())
        else:
            raise PathSyntaxError(f"unsupported predicate {tok[1]!r}", self.expr, tok[1])
        self.take("]")
        return pred


def parse_path(expr: str) -> PathExpr:
    """Parse a read path; raises :class:`PathSyntaxError` outside the subset."""
    return _Parser(expr).parse()


def parse_write_path(expr: str) -> WritePath:
    """Parse a write path: element names separated by ``/``, optional final ``@attr``."""
    text = expr.strip()
    if text.startswith("/"):
        text = text[1:]
    if not text:
        raise PathSyntaxError("empty write path", expr)
    parts = text.split("/")
    steps: list[str] = []
    attribute = None
    for i, part in enumerate(parts):
        part = part.strip()
        if not part:
            raise PathSyntaxError("empty path component", expr)
        if part.startswith("@"):
            if i != len(parts) - 1:
                raise PathSyntaxError(
                    "an attribute may only be the last node in a path", expr, part
                )
            attribute = part[1:]
            if not _NAME.fullmatch(attribute):
                raise PathSyntaxError("invalid attribute name", expr, part)
        else:
            if not _NAME.fullmatch(part):
                raise PathSyntaxError("invalid element name", expr, part)
            steps.append(part)
    return WritePath(tuple(steps), attribute)


_NAME = re.compile(r"[A-Za-z_][\w.\-]*(?::[A-Za-z_][\w.\-]*)?")


# ---------------------------------------------------------------------------
# evaluation

_ROOT = object()


def _axis_nodes(axis: str, node, context: Sequence[Node]) -> Iterable[Node]:
    if node is _ROOT:
        if axis == CHILD:
            return context
        if axis == DESCENDANT_OR_SELF:
            return (n for top in context for n in _self_and_descendants(top))
        return ()
    if axis == CHILD:
        return node.children
    if axis == DESCENDANT_OR_SELF:
        return _self_and_descendants(node)
    if axis == SELF:
        return (node,)
    return node.attribute_nodes


def _self_and_descendants(node: Node) -> Iterable[Node]:
    yield node
    yield from node.iter_descendants()


def evaluate(expr: PathExpr, context: Fragment | Sequence[Node]) -> list[Node]:
    """Nodes selected by ``expr``, in document order, without duplicates."""
    nodes = tuple(context)
    found: dict[int, Node] = {}
    for branch in expr.branches:
        current: list = [_ROOT] if branch.absolute else list(nodes)
        if branch.absolute and not nodes:
            continue
        for step in branch.steps:
            nxt: dict[int, Node] = {}
            for node in current:
                for cand in _axis_nodes(step.axis, node, nodes):
                    if id(cand) not in nxt and step.matches(cand):
                        nxt[id(cand)] = cand
            current = list(nxt.values())
            if not current:
                break
        for node in current:
            found[id(node)] = node
    return sorted(found.values(), key=lambda n: n.order)


def select(expr: str | PathExpr, context: Fragment | Sequence[Node]) -> list[Node]:
    if isinstance(expr, str):
        expr = parse_path(expr)
    return evaluate(expr, context)
