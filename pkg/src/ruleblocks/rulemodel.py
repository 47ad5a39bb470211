"""Rule-set model, XML loader, and the name registry for selectors/actions."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from . import conditions as C
from .actions import ActionFactory
from .docmodel import ELEMENT, TEXT, Node, load_xml, text_of
from .errors import LoadError, PathSyntaxError, RuleSetError, SetupError
from .pathlang import PathExpr, parse_path
from .selectors import BUILTIN_SELECTORS, SelectorSpec
from .xmlout import BUILTIN_ACTIONS

NONE = "NONE"
GROUPING_EXPRESSION = "GROUPING_EXPRESSION"
END_EXPRESSION = "END_EXPRESSION"
NEXT_BLOCK = "NEXT_BLOCK"
GROUPING_KINDS = (NONE, GROUPING_EXPRESSION, END_EXPRESSION, NEXT_BLOCK)


@dataclass(frozen=True)
class ActionSpec:
    name: str
    params: tuple[tuple[str, str], ...] = ()
    source: SelectorSpec | None = None
    impl: Any = field(default=None, compare=False, repr=False)

    @property
    def parameters(self) -> dict[str, str]:
        return dict(self.params)


@dataclass(frozen=True)
class Grouping:
    kind: str = NONE
    expr: PathExpr | None = None

    def __post_init__(self) -> None:
        if self.kind not in GROUPING_KINDS:
            raise ValueError(f"unknown grouping type {self.kind!r}")
        needs = self.kind in (GROUPING_EXPRESSION, END_EXPRESSION)
        if needs and self.expr is None:
            raise ValueError(f"grouping {self.kind} requires a GroupingExpression")
        if not needs and self.expr is not None:
            raise ValueError(f"grouping {self.kind} takes no expression")


@dataclass(frozen=True)
class Rule:
    id: str
    condition: C.Condition = C.ALWAYS
    action: ActionSpec | None = None
    inner: "RuleSet | None" = None

    def __post_init__(self) -> None:
        if self.action is None and self.inner is None:
            raise ValueError("a rule needs an Action, an inner RuleSet, or both")


@dataclass(frozen=True)
class BlockType:
    id: str
    start: PathExpr
    condition: C.Condition = C.ALWAYS
    grouping: Grouping = Grouping()
    rules: tuple[Rule, ...] = ()


@dataclass(frozen=True)
class RuleSet:
    id: str
    block_types: tuple[BlockType, ...] = ()
    pre: ActionSpec | None = None
    post: ActionSpec | None = None
    namespaces: tuple[tuple[str, str], ...] = ()
    # notes from lenient loading; not part of structural equality
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        ids = [bt.id for bt in self.block_types]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise ValueError(f"duplicate block type id(s): {', '.join(dupes)}")


# ---------------------------------------------------------------------------
# registry

SelectorFactory = Callable[[Mapping[str, str]], Any]


class Registry:
    """Maps selector and action names to factories."""

    def __init__(self) -> None:
        self.selectors: dict[str, SelectorFactory] = {}
        self.actions: dict[str, ActionFactory] = {}

    def register_selector(self, name: str, factory: SelectorFactory, *aliases: str) -> None:
        for key in (name, *aliases):
            if key in self.selectors:
                raise SetupError(f"selector {key!r} already registered")
            self.selectors[key] = factory

    def register_action(self, name: str, factory: ActionFactory, *aliases: str) -> None:
        for key in (name, *aliases):
            if key in self.actions:
                raise SetupError(f"action {key!r} already registered")
            self.actions[key] = factory

    def selector(self, name: str) -> SelectorFactory | None:
        return self.selectors.get(name)

    def action(self, name: str) -> ActionFactory | None:
        return self.actions.get(name)


def register_builtin(registry: Registry) -> Registry:
    for name, (factory, aliases) in BUILTIN_SELECTORS.items():
        registry.register_selector(name, factory, *aliases)
    for name, (factory, aliases) in BUILTIN_ACTIONS.items():
        registry.register_action(name, factory, *aliases)
    return registry


def default_registry() -> Registry:
    return register_builtin(Registry())


# ---------------------------------------------------------------------------
# parameters


def parse_params(text: str | None) -> dict[str, str]:
    """Parse ``key=value;key=value``. Values may contain ``=``."""
    result: dict[str, str] = {}
    if not text or not text.strip():
        return result
    for piece in text.split(";"):
        if not piece.strip():
            continue
        if "=" not in piece:
            raise ValueError(f"parameter {piece.strip()!r} has no '='")
        key, value = piece.split("=", 1)
        result[key.strip()] = value
    return result


# ---------------------------------------------------------------------------
# loader


class _Loader:
    def __init__(self, registry: Registry, lenient: bool = False) -> None:
        self.registry = registry
        self.lenient = lenient
        self.path: list[str] = []
        self.warnings: list[str] = []

    @property
    def where(self) -> str:
        return "/".join(self.path)

    def fail(self, message: str):
        raise RuleSetError(message, self.where)

    def enter(self, label: str, node: Node) -> None:
        ident = node.attributes.get("ID")
        self.path.append(f"{label}[{ident}]" if ident else label)

    def leave(self) -> None:
        self.path.pop()

    def children(self, node: Node, allowed: tuple[str, ...]) -> list[Node]:
        elems = []
        for child in node.children:
            if child.kind == ELEMENT:
                if child.name not in allowed:
                    self.fail(f"unexpected element <{child.name}> in <{node.name}>")
                elems.append(child)
        return elems

    def selector(self, name: str, params_text: str | None) -> SelectorSpec:
        factory = self.registry.selector(name)
        if factory is None:
            self.fail(f"unknown selector {name!r}")
        try:
            params = parse_params(params_text)
            impl = factory(params)
        except (ValueError, TypeError, PathSyntaxError) as exc:
            self.fail(f"selector {name!r}: {exc}")
        return SelectorSpec(name, tuple(sorted(params.items())), impl)

    def action(self, name: str | None, params_text: str | None, source=None,
               role: str = "perform") -> ActionSpec:
        if not name:
            self.fail("action without a class")
        factory = self.registry.action(name)
        if factory is None:
            self.fail(f"unknown action {name!r}")
        try:
            params = parse_params(params_text)
            impl = factory(params, source)
        except (ValueError, TypeError, PathSyntaxError) as exc:
            self.fail(f"action {name!r}: {exc}")
        if not callable(getattr(impl, role, None)):
            self.fail(f"action {name!r} cannot be used as a {role} action")
        return ActionSpec(name, tuple(sorted(params.items())), source, impl)

    def path_expr(self, text: str | None, what: str) -> PathExpr:
        if text is None:
            self.fail(f"{what} has no 'matches' attribute")
        try:
            return parse_path(text)
        except PathSyntaxError as exc:
            self.fail(f"invalid path in {what}: {exc}")

    def ruleset(self, node: Node) -> RuleSet:
        if node.name != "RuleSet":
            self.fail(f"expected <RuleSet>, found <{node.name}>")
        self.enter("RuleSet", node)
        try:
            attrs = node.attributes
            rs_id = attrs.get("ID")
            if not rs_id:
                self.fail("RuleSet has no ID")
            pre = post = None
            if attrs.get("pre"):
                pre = self.action(attrs["pre"], attrs.get("preParameters"), role="pre")
            if attrs.get("post"):
                post = self.action(attrs["post"], attrs.get("postParameters"), role="post")
            blocks = [self.block(b) for b in self.children(node, ("Block",))]
            namespaces = tuple(
                (k[6:], v) for k, v in attrs.items() if k.startswith("xmlns:")
            )
            try:
                return RuleSet(rs_id, tuple(blocks), pre, post, namespaces)
            except ValueError as exc:
                self.fail(str(exc))
        finally:
            self.leave()

    def block(self, node: Node) -> BlockType:
        self.enter("Block", node)
        try:
            bt_id = node.attributes.get("ID")
            if not bt_id:
                self.fail("Block has no ID")
            parts = self.children(node, ("Definition", "Rules"))
            definitions = [p for p in parts if p.name == "Definition"]
            if len(definitions) != 1:
                self.fail("Block needs exactly one Definition")
            start, cond, grouping = self.definition(definitions[0])
            rules: list[Rule] = []
            for rules_node in (p for p in parts if p.name == "Rules"):
                for rule_node in self.children(rules_node, ("Rule",)):
                    if self.lenient and _is_elided(rule_node):
                        self.warnings.append(f"{self.where}: skipped elided <Rule>")
                        continue
                    rules.append(self.rule(rule_node, len(rules) + 1))
            return BlockType(bt_id, start, cond, grouping, tuple(rules))
        finally:
            self.leave()

    def definition(self, node: Node):
        self.path.append("Definition")
        try:
            parts = self.children(node, ("Start", "Condition", "Grouping"))
            starts = [p for p in parts if p.name == "Start"]
            if len(starts) != 1:
                self.fail("Definition needs exactly one Start")
            start = self.path_expr(starts[0].attributes.get("matches"), "Start")
            conds = [p for p in parts if p.name == "Condition"]
            if len(conds) > 1:
                self.fail("Definition takes at most one top-level Condition")
            cond = self.condition(conds[0]) if conds else C.ALWAYS
            groupings = [p for p in parts if p.name == "Grouping"]
            if len(groupings) > 1:
                self.fail("Definition takes at most one Grouping")
            grouping = self.grouping(groupings[0]) if groupings else Grouping()
            return start, cond, grouping
        finally:
            self.leave()

    def grouping(self, node: Node) -> Grouping:
        kind = (node.attributes.get("type") or "").strip().upper()
        exprs = self.children(node, ("GroupingExpression",))
        if len(exprs) > 1:
            self.fail("Grouping takes at most one GroupingExpression")
        expr = (
            self.path_expr(exprs[0].attributes.get("matches"), "GroupingExpression")
            if exprs else None
        )
        try:
            return Grouping(kind, expr)
        except ValueError as exc:
            self.fail(str(exc))

    def condition(self, node: Node) -> C.Condition:
        attrs = node.attributes
        raw = attrs.get("type")
        if not raw:
            self.fail("Condition has no type")
        kind = C.canonical_kind(raw)
        if kind is None:
            self.fail(f"unknown condition type {raw!r}")
        kids = self.children(node, ("Condition",))
        try:
            if kind in C.COMPOSITE_KINDS:
                children = tuple(self.condition(k) for k in kids)
                bounds = {}
                for key in ("min", "max"):
                    if key in attrs:
                        try:
                            bounds[key] = int(attrs[key])
                        except ValueError:
                            self.fail(f"minmax {key} {attrs[key]!r} is not an integer")
                return C.Composite(kind, children, bounds.get("min"), bounds.get("max"))
            if kids:
                self.fail(f"terminal condition {raw!r} cannot have children")
            if attrs.get("selector"):
                spec = self.selector(attrs["selector"], attrs.get("selectorParameters"))
                return C.Terminal(kind, spec, attrs.get("value"))
            return C.Terminal(kind, value=attrs.get("value"))
        except ValueError as exc:
            self.fail(str(exc))

    def rule(self, node: Node, number: int) -> Rule:
        rule_id = node.attributes.get("ID") or f"rule-{number}"
        self.path.append(f"Rule[{rule_id}]")
        try:
            parts = self.children(node, ("Condition", "Action", "RuleSet"))
            conds = [p for p in parts if p.name == "Condition"]
            actions = [p for p in parts if p.name == "Action"]
            inners = [p for p in parts if p.name == "RuleSet"]
            if len(conds) > 1 or len(actions) > 1 or len(inners) > 1:
                self.fail("a Rule takes at most one Condition, Action and RuleSet")
            cond = self.condition(conds[0]) if conds else C.ALWAYS
            action = self.action_element(actions[0]) if actions else None
            inner = self.ruleset(inners[0]) if inners else None
            try:
                return Rule(rule_id, cond, action, inner)
            except ValueError as exc:
                self.fail(str(exc))
        finally:
            self.leave()

    def action_element(self, node: Node) -> ActionSpec:
        sources = self.children(node, ("Source",))
        if len(sources) > 1:
            self.fail("an Action takes at most one Source")
        source = None
        if sources:
            sattrs = sources[0].attributes
            if not sattrs.get("selector"):
                self.fail("Source has no selector")
            source = self.selector(sattrs["selector"], sattrs.get("selectorParameters"))
        return self.action(node.attributes.get("class"), node.attributes.get("parameters"), source)


def _is_elided(node: Node) -> bool:
    """A placeholder element holding only an ellipsis, e.g. ``<Rule>...</Rule>``."""
    if any(c.kind == ELEMENT for c in node.children):
        return False
    return text_of(node).strip() in ("...", "…")


def load_ruleset(data: bytes | str, registry: Registry | None = None, *,
                 lenient: bool = True) -> RuleSet:
    """Load and fully validate a rule-set document.

    With ``lenient`` (the default), documents that are not well-formed are
    given one repair pass: elision markers ``[...]`` inside tags are dropped
    and unclosed ``Condition`` elements are closed where the grammar forbids
    them to continue. Rules whose whole body is an ellipsis placeholder are
    skipped. Each repair is listed in ``RuleSet.warnings``.
    """
    registry = registry or default_registry()
    warnings: list[str] = []
    try:
        tree = load_xml(data)
    except LoadError as exc:
        if not lenient:
            raise RuleSetError(f"rule set is not well-formed XML: {exc}") from None
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        repaired, warnings = repair_markup(text)
        try:
            tree = load_xml(repaired)
        except LoadError:
            raise RuleSetError(f"rule set is not well-formed XML: {exc}") from None
    loader = _Loader(registry, lenient)
    ruleset = loader.ruleset(tree.root)
    warnings += loader.warnings
    if warnings:
        ruleset = RuleSet(
            ruleset.id, ruleset.block_types, ruleset.pre, ruleset.post,
            ruleset.namespaces, tuple(warnings),
        )
    return ruleset


def load_ruleset_file(path, registry: Registry | None = None, **kw) -> RuleSet:
    with open(path, "rb") as fh:
        return load_ruleset(fh.read(), registry, **kw)


_MARKUP = re.compile(r"<!--.*?-->|<\?.*?\?>|<!\[CDATA\[.*?\]\]>|<![^>]*>|<[^>]*>|[^<]+", re.S)
_TAG_NAME = re.compile(r"</?\s*([^\s/>]+)")
_ELISION = re.compile(r"\[\s*(?:\.\.\.|…)\s*\]")


def repair_markup(text: str) -> tuple[str, list[str]]:
    """Best-effort repair of hand-edited rule markup. Returns (text, notes)."""
    out: list[str] = []
    notes: list[str] = []
    stack: list[str] = []
    line = 1
    for m in _MARKUP.finditer(text):
        tok = m.group()
        if tok.startswith("<") and not tok.startswith(("<!", "<?")):
            if _ELISION.search(tok):
                tok = _ELISION.sub("", tok)
                notes.append(f"line {line}: removed elision marker inside tag")
            name_m = _TAG_NAME.match(tok)
            name = name_m.group(1) if name_m else ""
            if tok.startswith("</"):
                while stack and stack[-1] != name and stack[-1] == "Condition":
                    out.append("</Condition>")
                    stack.pop()
                    notes.append(f"line {line}: closed unterminated <Condition> before </{name}>")
                if stack and stack[-1] == name:
                    stack.pop()
            else:
                while stack and stack[-1] == "Condition" and name != "Condition":
                    out.append("</Condition>")
                    stack.pop()
                    notes.append(f"line {line}: closed unterminated <Condition> before <{name}>")
                if not tok.rstrip().endswith("/>"):
                    stack.append(name)
        out.append(tok)
        line += tok.count("\n")
    return "".join(out), notes
