"""Selectors: named, parameterized extractors mapping a block to content.

A selector instance exposes ``get(block, ctx)`` returning ``None`` (absent),
a :class:`~ruleblocks.docmodel.Node`, or a :class:`~ruleblocks.docmodel.Fragment`.
Subclasses of :class:`CachedSelector` implement ``handle_get`` instead and
are memoized per run.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Union

from .context import YELLOW, Block, ExtractionContext
from .docmodel import (
    Fragment,
    Node,
    clone_span,
    effective_style,
    is_blank_text,
    iter_text_nodes,
    make_text,
    text_of,
)
from . import pathlang

log = logging.getLogger(__name__)

SelectorResult = Union[Node, Fragment, None]


@dataclass(frozen=True)
class SelectorSpec:
    """A selector reference as written in a rule set, bound at load time."""

    name: str
    params: tuple[tuple[str, str], ...] = ()
    impl: Any = field(default=None, compare=False, repr=False)

    @property
    def parameters(self) -> dict[str, str]:
        return dict(self.params)


class Selector:
    cacheable = False

    def get(self, block: Block, ctx: ExtractionContext) -> SelectorResult:
        raise NotImplementedError


class CachedSelector(Selector):
    """Memoizes ``handle_get`` per (selector, block) within one run."""

    cacheable = True

    def get(self, block: Block, ctx: ExtractionContext) -> SelectorResult:
        key = (id(self), block)
        try:
            return ctx.cache[key][1]
        except KeyError:
            pass
        value = self.handle_get(block, ctx)
        # keep self alive so id() stays unique for the life of the cache
        ctx.cache[key] = (self, value)
        return value

    def handle_get(self, block: Block, ctx: ExtractionContext) -> SelectorResult:
        raise NotImplementedError


def select(spec: SelectorSpec, block: Block, ctx: ExtractionContext) -> SelectorResult:
    """Run a bound selector; failures become a yellow event and an absent result."""
    try:
        return spec.impl.get(block, ctx)
    except Exception as exc:  # noqa: BLE001 - fault isolation
        log.debug("selector %s failed", spec.name, exc_info=True)
        ctx.emit(YELLOW, "selector-failed", f"selector {spec.name!r} failed: {exc}")
        return None


def cached_select(spec: SelectorSpec, block: Block, ctx: ExtractionContext) -> SelectorResult:
    impl = spec.impl
    if not impl.cacheable:
        raise TypeError(f"selector {spec.name!r} is not cacheable")
    return select(spec, block, ctx)


# ---------------------------------------------------------------------------
# built-ins


class IdentitySelector(CachedSelector):
    def handle_get(self, block, ctx):
        return block.nodes


class StartSelector(CachedSelector):
    """The block's starting node."""

    def handle_get(self, block, ctx):
        return block.start


class PositionSelector(Selector):
    """1-based index of the block among all blocks of the current application."""

    def get(self, block, ctx):
        return make_text(str(block.ordinal))


class XPathSelector(CachedSelector):
    def __init__(self, xpath: str) -> None:
        self.expr = pathlang.parse_path(xpath)

    def handle_get(self, block, ctx):
        hits = pathlang.evaluate(self.expr, block.nodes)
        return hits[0] if hits else None


def regex_span(pattern: re.Pattern, text: str) -> tuple[int, int] | None:
    """Span of group 1 of the first match (whole match if group 1 is unavailable)."""
    m = pattern.search(text)
    if m is None:
        return None
    if pattern.groups >= 1 and m.start(1) != -1:
        return m.span(1)
    return m.span()


class RegExpSelector(CachedSelector):
    def __init__(self, regexp: str) -> None:
        self.pattern = re.compile(regexp)

    def handle_get(self, block, ctx):
        nodes = block.nodes.nodes
        span = regex_span(self.pattern, text_of(nodes))
        if span is None:
            return None
        return clone_span(nodes, *span)


_TRUE = {"true", "1", "yes", "on"}


def property_matches(actual, expected: str) -> bool:
    if actual is None:
        return False
    if isinstance(actual, bool):
        return actual == (expected.strip().lower() in _TRUE)
    if isinstance(actual, int):
        try:
            return actual == int(expected)
        except ValueError:
            return False
    return str(actual).strip().lower() == expected.strip().lower()


class StyledSelector(CachedSelector):
    """Text whose resolved style property matches a value.

    With ``leading=true`` only the first contiguous matching run at the start
    of the block's first node is returned (whitespace-only text is neutral).
    """

    def __init__(self, property: str, value: str, leading: str = "false") -> None:
        self.property = property
        self.value = value
        self.leading = leading.strip().lower() in _TRUE

    def spans(self, block, ctx) -> tuple[tuple[Node, ...], list[tuple[int, int]]]:
        """Matching text spans as offsets into the text of the searched nodes."""
        tree = ctx.tree
        if tree is None or not block.nodes:
            return (), []
        scope = block.nodes.nodes[:1] if self.leading else block.nodes.nodes
        spans: list[tuple[int, int]] = []
        offset = 0
        for tnode in iter_text_nodes(scope):
            lo, offset = offset, offset + len(tnode.text)
            hit = property_matches(effective_style(tree, tnode, self.property), self.value)
            if is_blank_text(tnode) and spans and spans[-1][1] == lo:
                spans[-1] = (spans[-1][0], offset)
                continue
            if hit:
                if spans and spans[-1][1] == lo:
                    spans[-1] = (spans[-1][0], offset)
                else:
                    spans.append((lo, offset))
            elif self.leading and not is_blank_text(tnode):
                break
        if self.leading:
            spans = spans[:1]
        return scope, spans

    def handle_get(self, block, ctx):
        scope, spans = self.spans(block, ctx)
        if not spans:
            return None
        if self.leading:
            return clone_span(scope, *spans[0])
        parts: list[Node] = []
        for lo, hi in spans:
            parts.extend(clone_span(scope, lo, hi).nodes)
        return Fragment(tuple(parts))


SelectorFactory = Callable[..., Selector]


def _factory(cls, required=(), optional=()) -> SelectorFactory:
    def build(params: Mapping[str, str]) -> Selector:
        missing = [k for k in required if k not in params]
        if missing:
            raise ValueError(f"missing parameter(s): {', '.join(missing)}")
        unknown = sorted(set(params) - set(required) - set(optional))
        if unknown:
            raise ValueError(f"unknown parameter(s): {', '.join(unknown)}")
        try:
            return cls(**params)
        except re.error as exc:
            raise ValueError(f"invalid regular expression: {exc}") from None

    build.__name__ = f"make_{cls.__name__}"
    return build


identity_factory = _factory(IdentitySelector)
start_factory = _factory(StartSelector)
position_factory = _factory(PositionSelector)
xpath_factory = _factory(XPathSelector, required=("xpath",))
regexp_factory = _factory(RegExpSelector, required=("regexp",))
styled_factory = _factory(StyledSelector, required=("property", "value"), optional=("leading",))

_LEGACY = "de.knowit.phoenix.selectors."

BUILTIN_SELECTORS: dict[str, tuple[SelectorFactory, tuple[str, ...]]] = {
    "identity": (identity_factory, (_LEGACY + "IdentitySelector",)),
    "position": (position_factory, (_LEGACY + "PositionSelector",)),
    "xpath": (xpath_factory, (_LEGACY + "XPathSelector",)),
    "regexp": (regexp_factory, (_LEGACY + "RegExpSelector", _LEGACY + "RegexpSelector")),
    "styled": (styled_factory, ()),
    "start": (start_factory, ()),
}


def identity_spec() -> SelectorSpec:
    return SelectorSpec("identity", (), IdentitySelector())


# functional aliases matching the operation names


def identity_selector(block: Block) -> SelectorResult:
    return block.nodes


def position_selector(block: Block, ctx: ExtractionContext | None = None) -> SelectorResult:
    return make_text(str(block.ordinal))


def xpath_selector(xpath: str, block: Block) -> SelectorResult:
    return XPathSelector(xpath).handle_get(block, None)


def regexp_selector(regexp: str, block: Block) -> SelectorResult:
    return RegExpSelector(regexp).handle_get(block, None)
