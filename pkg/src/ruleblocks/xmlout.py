"""XML output backend.

The user object is an :class:`OutputCursor` pointing into a mutable output
document that never shares nodes with the input tree. ``descend`` moves the
cursor along a write path, ``set_node`` writes attributes or copies content.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Mapping
from xml.sax.saxutils import escape, quoteattr

from .actions import Action, PreAction, check_params, parse_bool
from .context import GREEN, YELLOW, Block, ExtractionContext
from .docmodel import ATTRIBUTE, ELEMENT, TEXT, Fragment, Node, normalize_space, text_of
from .pathlang import WritePath, parse_write_path
from .selectors import SelectorSpec, identity_spec, select

log = logging.getLogger("ruleblocks.trace")


class OutElement:
    __slots__ = ("name", "attributes", "children", "parent")

    def __init__(self, name: str, attributes: Mapping[str, str] | None = None) -> None:
        self.name = name
        self.attributes: dict[str, str] = dict(attributes or {})
        self.children: list[OutElement | str] = []
        self.parent: OutElement | None = None

    def append(self, child: "OutElement | str") -> None:
        if isinstance(child, str):
            if self.children and isinstance(self.children[-1], str):
                self.children[-1] += child
                return
        else:
            child.parent = self
        self.children.append(child)

    def elements(self, name: str | None = None) -> list["OutElement"]:
        return [
            c for c in self.children
            if isinstance(c, OutElement) and (name is None or c.name == name)
        ]

    def text(self) -> str:
        return "".join(c if isinstance(c, str) else c.text() for c in self.children)

    def __repr__(self) -> str:
        return f"<OutElement {self.name}>"


class OutputDocument:
    def __init__(self, root_name: str = "output") -> None:
        self.root = OutElement(root_name)
        self.namespaces: dict[str, str] = {}
        # scratch space for backends built on top of this one
        self.extras: dict[str, Any] = {}


@dataclass
class OutputCursor:
    document: OutputDocument
    node: OutElement

    def at(self, node: OutElement) -> "OutputCursor":
        return OutputCursor(self.document, node)


def new_cursor(root_name: str = "output") -> OutputCursor:
    doc = OutputDocument(root_name)
    return OutputCursor(doc, doc.root)


def _require_cursor(obj: Any) -> OutputCursor:
    if not isinstance(obj, OutputCursor):
        raise TypeError(f"user object must be an OutputCursor, got {type(obj).__name__}")
    return obj


def _walk(steps, overwrite: bool, cursor: OutputCursor) -> OutElement:
    node = cursor.node
    last = len(steps) - 1
    for i, name in enumerate(steps):
        existing = node.elements(name)
        if existing and not (overwrite and i == last):
            node = existing[-1]
        else:
            child = OutElement(name)
            node.append(child)
            node = child
    return node


def descend(path: WritePath, overwrite: bool, cursor: OutputCursor) -> OutputCursor:
    """Cursor at the element named by ``path``, creating nodes as needed.

    ``overwrite`` creates a fresh final element; intermediate steps and the
    non-overwrite case reuse the last existing child of that name.
    """
    if not path.ends_in_element:
        raise ValueError("descend path must end in an element")
    return cursor.at(_walk(path.steps, overwrite, cursor))


def _copy_in(node: Node, document: OutputDocument, namespaces: Mapping[str, str]):
    if node.kind == TEXT:
        return node.text
    if node.kind == ATTRIBUTE:
        return node.text
    elem = OutElement(node.name, node.attributes)
    _note_prefix(node.name, document, namespaces)
    for key in node.attributes:
        _note_prefix(key, document, namespaces)
    for child in node.children:
        elem.append(_copy_in(child, document, namespaces))
    return elem


def _note_prefix(name: str, document: OutputDocument, namespaces: Mapping[str, str]) -> None:
    if ":" in name:
        prefix = name.split(":", 1)[0]
        if prefix != "xmlns" and prefix in namespaces:
            document.namespaces.setdefault(prefix, namespaces[prefix])


def append_copy(target: OutElement, content, document: OutputDocument, namespaces) -> None:
    """Deep-copy a node or fragment from an input tree under ``target``."""
    nodes = content.nodes if isinstance(content, Fragment) else (content,)
    for node in nodes:
        target.append(_copy_in(node, document, namespaces))


def set_node(
    path: WritePath,
    overwrite: bool,
    source: SelectorSpec | None,
    block: Block,
    cursor: OutputCursor,
    ctx: ExtractionContext,
) -> None:
    result = select(source or identity_spec(), block, ctx)
    if result is None:
        ctx.emit(YELLOW, "no-value", "selector returned nothing; no value written")
        return
    target = _walk(path.steps, overwrite, cursor)
    if path.attribute is not None:
        target.attributes[path.attribute] = normalize_space(text_of(result))
    else:
        namespaces = ctx.tree.namespaces if ctx.tree is not None else {}
        append_copy(target, result, cursor.document, namespaces)


class DescendNodeAction(Action, PreAction):
    def __init__(self, params: Mapping[str, str], source: SelectorSpec | None = None) -> None:
        check_params(params, required=("path",), optional=("overwrite",))
        if source is not None:
            raise ValueError("descend takes no Source selector")
        self.path = parse_write_path(params["path"])
        if not self.path.ends_in_element:
            raise ValueError("descend path must end in an element reference")
        self.overwrite = parse_bool(params.get("overwrite", "false"), "overwrite")

    def pre(self, parent, block, ctx):
        return descend(self.path, self.overwrite, _require_cursor(parent))

    def perform(self, block, user_object, ctx):
        return descend(self.path, self.overwrite, _require_cursor(user_object))


class SetNodeAction(Action):
    def __init__(self, params: Mapping[str, str], source: SelectorSpec | None = None) -> None:
        check_params(params, required=("path",), optional=("overwrite",))
        self.path = parse_write_path(params["path"])
        self.overwrite = parse_bool(params.get("overwrite", "false"), "overwrite")
        self.source = source

    def perform(self, block, user_object, ctx):
        set_node(self.path, self.overwrite, self.source, block, _require_cursor(user_object), ctx)


def trace(block: Block, ctx: ExtractionContext) -> None:
    preview = normalize_space(" ".join(text_of(n) for n in block.nodes))
    if len(preview) > 60:
        preview = preview[:57] + "..."
    message = f"{block.type_id}#{block.ordinal}: {preview}"
    ctx.emit(GREEN, "trace", message)
    log.info("%s", message)


class TraceAction(Action):
    def __init__(self, params: Mapping[str, str], source: SelectorSpec | None = None) -> None:
        check_params(params)

    def perform(self, block, user_object, ctx):
        trace(block, ctx)


_LEGACY_XML = "de.knowit.phoenix.xmlUserObject."

BUILTIN_ACTIONS = {
    "trace": (TraceAction, ("de.knowit.phoenix.actions.Trace",)),
    "descend": (DescendNodeAction, (_LEGACY_XML + "DescendNodePreAction",)),
    "setNode": (SetNodeAction, (_LEGACY_XML + "SetNodeAction",)),
}


# ---------------------------------------------------------------------------
# serialization


def _write(node: OutElement, out: list[str], depth: int) -> None:
    pad = "  " * depth
    attrs = "".join(f" {k}={quoteattr(v)}" for k, v in node.attributes.items())
    if not node.children:
        out.append(f"{pad}<{node.name}{attrs}/>\n")
    elif any(isinstance(c, str) for c in node.children):
        out.append(f"{pad}{_inline(node)}\n")
    else:
        out.append(f"{pad}<{node.name}{attrs}>\n")
        for child in node.children:
            _write(child, out, depth + 1)
        out.append(f"{pad}</{node.name}>\n")


def _inline(node: OutElement) -> str:
    attrs = "".join(f" {k}={quoteattr(v)}" for k, v in node.attributes.items())
    if not node.children:
        return f"<{node.name}{attrs}/>"
    inner = "".join(escape(c) if isinstance(c, str) else _inline(c) for c in node.children)
    return f"<{node.name}{attrs}>{inner}</{node.name}>"


def serialize(document: OutputDocument | OutputCursor) -> bytes:
    """UTF-8 XML with 2-space indentation; mixed content is kept inline."""
    if isinstance(document, OutputCursor):
        document = document.document
    root = document.root
    saved = dict(root.attributes)
    declared = {
        f"xmlns:{p}": uri
        for p, uri in sorted(document.namespaces.items())
        if f"xmlns:{p}" not in saved
    }
    root.attributes = {**declared, **saved}
    try:
        out = ['<?xml version="1.0" encoding="UTF-8"?>\n']
        _write(root, out, 0)
    finally:
        root.attributes = saved
    return "".join(out).encode("utf-8")
