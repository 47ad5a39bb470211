"""Block construction and rule application."""

from __future__ import annotations

import logging
from typing import Any, Sequence

from . import conditions
from .context import RED, YELLOW, Block, EngineConfig, ExtractionContext, Event
from .docmodel import DocumentTree, Fragment, Node, document_scope, is_blank_text
from .pathlang import evaluate as eval_path
from .rulemodel import (
    END_EXPRESSION,
    GROUPING_EXPRESSION,
    NEXT_BLOCK,
    BlockType,
    Rule,
    RuleSet,
)

log = logging.getLogger(__name__)


def _following(node: Node, scope: Sequence[Node], positions: dict[int, int]) -> Sequence[Node]:
    pos = positions.get(id(node))
    if pos is not None:
        return scope[pos + 1:]
    if node.parent is None or not node.is_element:
        return ()
    return node.parent.children[node.index + 1:]


def _expand(start: Node, bt: BlockType, siblings: Sequence[Node], starts: set[int]) -> tuple[Node, ...]:
    kind = bt.grouping.kind
    taken = [start]
    if kind not in (GROUPING_EXPRESSION, END_EXPRESSION, NEXT_BLOCK):
        return tuple(taken)
    pending: list[Node] = []
    for sib in siblings:
        # whitespace-only text neither extends nor terminates a block
        if is_blank_text(sib):
            pending.append(sib)
            continue
        if kind == NEXT_BLOCK:
            ok = id(sib) not in starts
        else:
            hit = bool(eval_path(bt.grouping.expr, (sib,)))
            ok = hit if kind == GROUPING_EXPRESSION else not hit
        if not ok:
            break
        taken.extend(pending)
        pending.clear()
        taken.append(sib)
    return tuple(taken)


def build_blocks(
    ruleset: RuleSet,
    scope: Fragment | Sequence[Node],
    ctx: ExtractionContext | None = None,
) -> list[Block]:
    """Identify the blocks of one rule-set application over ``scope``.

    Phase one collects minimal single-node blocks (a node starts at most one
    block; earlier block types win). Phase two expands each by its grouping.
    """
    ctx = ctx or ExtractionContext()
    nodes = tuple(scope)
    minimal: list[tuple[Node, BlockType]] = []
    claimed: set[int] = set()
    for bt in ruleset.block_types:
        for node in eval_path(bt.start, nodes):
            if id(node) in claimed:
                continue
            provisional = Block(bt.id, Fragment((node,)), node, 0)
            ctx.push_where(block_type=bt.id, block=provisional, rule=None)
            try:
                ok = conditions.evaluate(bt.condition, provisional, ctx)
            finally:
                ctx.pop_where()
            if ok:
                claimed.add(id(node))
                minimal.append((node, bt))
    minimal.sort(key=lambda item: item[0].order)
    positions = {id(n): i for i, n in enumerate(nodes)}
    blocks = []
    for ordinal, (node, bt) in enumerate(minimal, start=1):
        run = _expand(node, bt, _following(node, nodes, positions), claimed)
        blocks.append(Block(bt.id, Fragment(run), node, ordinal))
    return blocks


def _fire(rule: Rule, ruleset: RuleSet, block: Block, ctx: ExtractionContext) -> None:
    ctx.push_where(rule=rule.id)
    try:
        if not conditions.evaluate(rule.condition, block, ctx):
            return
        ctx.rule_counts[f"{ruleset.id}/{block.type_id}/{rule.id}"] += 1
        target = ctx.user_object
        if rule.action is not None:
            try:
                replacement = rule.action.impl.perform(block, target, ctx)
            except Exception as exc:  # noqa: BLE001 - fault isolation per rule
                log.debug("action %s failed", rule.action.name, exc_info=True)
                ctx.emit(RED, "action-failed", f"action {rule.action.name!r} failed: {exc}")
                return
            if replacement is not None:
                target = replacement
        if rule.inner is not None:
            _apply(rule.inner, block.nodes, target, block, ctx)
    finally:
        ctx.pop_where()


def _apply(ruleset: RuleSet, scope, parent: Any, block: Block | None, ctx: ExtractionContext) -> Any:
    ctx.push_where(ruleset=ruleset.id, block_type=None, rule=None)
    try:
        child = parent
        if ruleset.pre is not None:
            try:
                child = ruleset.pre.impl.pre(parent, block, ctx)
            except Exception as exc:  # noqa: BLE001
                ctx.emit(RED, "pre-failed", f"pre action {ruleset.pre.name!r} failed: {exc}",
                         rule=ruleset.pre.name)
                return parent
        depth = len(ctx.stack)
        ctx.stack.append(child)
        try:
            blocks = build_blocks(ruleset, scope, ctx)
            by_id = {bt.id: bt for bt in ruleset.block_types}
            for b in blocks:
                ctx.block_counts[f"{ruleset.id}/{b.type_id}"] += 1
            for b in blocks:
                ctx.push_where(block_type=b.type_id, block=b)
                try:
                    for rule in by_id[b.type_id].rules:
                        _fire(rule, ruleset, b, ctx)
                finally:
                    ctx.pop_where()
        finally:
            del ctx.stack[depth:]
        if ruleset.post is not None:
            try:
                ruleset.post.impl.post(parent, child, block, ctx)
            except Exception as exc:  # noqa: BLE001
                ctx.emit(RED, "post-failed", f"post action {ruleset.post.name!r} failed: {exc}",
                         rule=ruleset.post.name)
        return child
    finally:
        ctx.pop_where()


def apply_inner(inner: RuleSet, block: Block, ctx: ExtractionContext, parent: Any = None) -> None:
    """Apply ``inner`` to the block's content with a scoped user object."""
    _apply(inner, block.nodes, ctx.user_object if parent is None else parent, block, ctx)


def run(
    ruleset: RuleSet,
    document: DocumentTree,
    user_object: Any,
    config: EngineConfig | None = None,
    *,
    context: ExtractionContext | None = None,
) -> tuple[Any, list[Event]]:
    """Apply ``ruleset`` to a document; returns the user object and events.

    When the top-level rule set has a pre action but no post action, the
    object created by the pre action is returned.
    """
    ctx = context or ExtractionContext(config)
    ctx.begin_document(document)
    for note in document.notes:
        ctx.emit(YELLOW, note.code, note.message)
    result = _apply(ruleset, document_scope(document), user_object, None, ctx)
    if ruleset.post is not None:
        result = user_object
    return result, list(ctx.events)
