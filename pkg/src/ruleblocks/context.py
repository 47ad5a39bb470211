"""Run-scoped state shared by selectors, conditions, actions and the engine."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .docmodel import DocumentTree, Fragment, Node, node_path

GREEN = "green"
YELLOW = "yellow"
RED = "red"
SEVERITIES = (GREEN, YELLOW, RED)

DEFAULT_PARAGRAPH_ELEMENTS = frozenset(
    {"text:p", "text:h", "p", "h1", "h2", "h3", "h4", "h5", "h6"}
)


def worst(severities) -> str:
    rank = {s: i for i, s in enumerate(SEVERITIES)}
    return max(severities, key=rank.__getitem__, default=GREEN)


@dataclass(frozen=True)
class Block:
    """A contiguous run of sibling nodes claimed by one block type."""

    type_id: str
    nodes: Fragment
    start: Node
    ordinal: int = 0

    @property
    def fragment(self) -> Fragment:
        return self.nodes


@dataclass(frozen=True)
class Event:
    severity: str
    code: str
    message: str
    ruleset: str | None = None
    block_type: str | None = None
    rule: str | None = None
    location: str | None = None

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "ruleset": self.ruleset,
            "block_type": self.block_type,
            "rule": self.rule,
            "location": self.location,
        }


@dataclass(frozen=True)
class EngineConfig:
    paragraph_elements: frozenset[str] = DEFAULT_PARAGRAPH_ELEMENTS
    output_dir: Path | None = None
    trace: bool = False


@dataclass
class _Where:
    ruleset: str | None = None
    block_type: str | None = None
    rule: str | None = None
    block: Block | None = None


class ExtractionContext:
    """User-object stack, event log and selector cache for one document run."""

    def __init__(self, config: EngineConfig | None = None) -> None:
        self.config = config or EngineConfig()
        self.stack: list[Any] = []
        self.events: list[Event] = []
        self.cache: dict = {}
        self.block_counts: Counter[str] = Counter()
        self.rule_counts: Counter[str] = Counter()
        self.tree: DocumentTree | None = None
        self._where: list[_Where] = [_Where()]

    @property
    def user_object(self) -> Any:
        return self.stack[-1] if self.stack else None

    @property
    def where(self) -> _Where:
        return self._where[-1]

    def push_where(self, **changes) -> None:
        cur = self._where[-1]
        self._where.append(_Where(**{**cur.__dict__, **changes}))

    def pop_where(self) -> None:
        self._where.pop()

    def begin_document(self, tree: DocumentTree) -> None:
        self.tree = tree
        self.cache.clear()

    def emit(
        self,
        severity: str,
        code: str,
        message: str,
        *,
        node: Node | None = None,
        rule: str | None = None,
    ) -> Event:
        where = self.where
        if node is None and where.block is not None:
            node = where.block.start
        location = None
        if node is not None and not node.synthetic:
            location = node_path(node)
        event = Event(
            severity,
            code,
            message,
            ruleset=where.ruleset,
            block_type=where.block_type,
            rule=rule or where.rule,
            location=location,
        )
        if severity == RED and event.rule is None:
            event = Event(
                event.severity, event.code, event.message, event.ruleset,
                event.block_type, "<engine>", event.location,
            )
        self.events.append(event)
        return event
