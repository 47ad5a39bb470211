"""Condition algebra evaluated against blocks."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from .context import Block, ExtractionContext
from .docmodel import normalize_space, text_of
from .selectors import SelectorSpec, identity_spec, select

EXISTS = "exists"
INT_EQUALS = "intEquals"
TEXT_EQUALS = "textEquals"
TEXT_CONTAINS = "textContains"
TEXT_STARTS_WITH = "textStartsWith"
TEXT_ENDS_WITH = "textEndsWith"
TEXT_MATCHES = "textMatches"
PARAGRAPH_START = "paragraphStart"

AND = "and"
OR = "or"
NOT = "not"
MINMAX = "minmax"

TERMINAL_KINDS = (
    EXISTS,
    INT_EQUALS,
    TEXT_EQUALS,
    TEXT_CONTAINS,
    TEXT_STARTS_WITH,
    TEXT_ENDS_WITH,
    TEXT_MATCHES,
    PARAGRAPH_START,
)
COMPOSITE_KINDS = (AND, OR, NOT, MINMAX)
VALUE_KINDS = frozenset(TERMINAL_KINDS) - {EXISTS, PARAGRAPH_START}

# spellings accepted in rule files, compared after lower-casing and dropping - and _
_ALIASES = {k.lower(): k for k in TERMINAL_KINDS + COMPOSITE_KINDS}
_ALIASES.update(
    {
        "equals": TEXT_EQUALS,
        "contains": TEXT_CONTAINS,
        "startswith": TEXT_STARTS_WITH,
        "endswith": TEXT_ENDS_WITH,
        "matches": TEXT_MATCHES,
    }
)

_INT = re.compile(r"[+-]?\d+")


def canonical_kind(name: str) -> str | None:
    return _ALIASES.get(name.replace("-", "").replace("_", "").lower())


@dataclass(frozen=True)
class Terminal:
    kind: str
    selector: SelectorSpec = field(default_factory=identity_spec)
    value: str | None = None
    pattern: re.Pattern | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in TERMINAL_KINDS:
            raise ValueError(f"unknown terminal condition {self.kind!r}")
        if self.kind in VALUE_KINDS and self.value is None:
            raise ValueError(f"condition {self.kind!r} requires a value")
        if self.kind == INT_EQUALS and not _INT.fullmatch(self.value.strip()):
            raise ValueError(f"intEquals value {self.value!r} is not an integer")
        if self.kind == TEXT_MATCHES and self.pattern is None:
            try:
                object.__setattr__(self, "pattern", re.compile(self.value))
            except re.error as exc:
                raise ValueError(f"invalid regular expression {self.value!r}: {exc}") from None


@dataclass(frozen=True)
class Composite:
    kind: str
    children: tuple["Condition", ...] = ()
    min: int | None = None
    max: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in COMPOSITE_KINDS:
            raise ValueError(f"unknown composite condition {self.kind!r}")
        if self.kind == NOT and len(self.children) != 1:
            raise ValueError("'not' takes exactly one child condition")
        if self.kind == MINMAX:
            if self.min is None or self.max is None:
                raise ValueError("'minmax' requires explicit min and max")
            if not 0 <= self.min <= self.max <= len(self.children):
                raise ValueError(
                    f"'minmax' bounds must satisfy 0 <= min <= max <= {len(self.children)}"
                )


Condition = Union[Terminal, Composite]

ALWAYS = Composite(AND)


def evaluate(cond: Condition, block: Block, ctx: ExtractionContext) -> bool:
    if isinstance(cond, Composite):
        if cond.kind == AND:
            return all(evaluate(c, block, ctx) for c in cond.children)
        if cond.kind == OR:
            return any(evaluate(c, block, ctx) for c in cond.children)
        if cond.kind == NOT:
            return not evaluate(cond.children[0], block, ctx)
        hits = sum(1 for c in cond.children if evaluate(c, block, ctx))
        return cond.min <= hits <= cond.max

    if cond.kind == PARAGRAPH_START:
        first = block.nodes.nodes[0] if block.nodes else None
        return (
            first is not None
            and first.is_element
            and first.name in ctx.config.paragraph_elements
        )

    result = select(cond.selector, block, ctx)
    if result is None:
        return False
    if cond.kind == EXISTS:
        return True
    text = normalize_space(text_of(result))
    value = cond.value
    if cond.kind == TEXT_EQUALS:
        return text == value
    if cond.kind == TEXT_CONTAINS:
        return value in text
    if cond.kind == TEXT_STARTS_WITH:
        return text.startswith(value)
    if cond.kind == TEXT_ENDS_WITH:
        return text.endswith(value)
    if cond.kind == TEXT_MATCHES:
        return cond.pattern.fullmatch(text) is not None
    # INT_EQUALS
    if not _INT.fullmatch(text):
        return False
    return int(text) == int(value)
