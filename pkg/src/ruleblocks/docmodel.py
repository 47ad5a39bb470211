"""Immutable document trees, loaders for plain XML and zipped office
containers, and style lookup through inherited style masters."""

from __future__ import annotations

import hashlib
import io
import itertools
import re
import zipfile
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence, Union
from xml.parsers import expat
from xml.sax.saxutils import escape, quoteattr

from .errors import LoadError

ELEMENT = "element"
TEXT = "text"
ATTRIBUTE = "attribute"

_tree_serials = itertools.count(1)


class Node:
    """One node of a loaded (or synthetic) tree.

    Nodes compare and hash by identity. Attributes are fixed at construction;
    the loader is the only code that links parents and children.
    """

    __slots__ = (
        "kind",
        "name",
        "text",
        "attributes",
        "children",
        "attribute_nodes",
        "parent",
        "index",
        "order",
        "synthetic",
        "_frozen",
    )

    def __init__(
        self,
        kind: str,
        name: str = "",
        text: str = "",
        attributes: Mapping[str, str] | None = None,
        *,
        synthetic: bool = False,
    ) -> None:
        object.__setattr__(self, "_frozen", False)
        self.kind = kind
        self.name = name
        self.text = text
        self.attributes = MappingProxyType(dict(attributes or {}))
        self.children: tuple[Node, ...] = ()
        self.attribute_nodes: tuple[Node, ...] = ()
        self.parent: Node | None = None
        self.index = 0
        self.order: tuple[int, int] = (0, 0)
        self.synthetic = synthetic

    def __setattr__(self, key, value):
        if self._frozen:
            raise AttributeError(f"{type(self).__name__} is immutable")
        object.__setattr__(self, key, value)

    def __repr__(self) -> str:
        if self.kind == TEXT:
            return f"<text {self.text[:20]!r}>"
        if self.kind == ATTRIBUTE:
            return f"<@{self.name}={self.text!r}>"
        return f"<{self.name}>"

    @property
    def is_element(self) -> bool:
        return self.kind == ELEMENT

    @property
    def style_name(self) -> str | None:
        if self.kind != ELEMENT:
            return None
        for key, value in self.attributes.items():
            if key == "style-name" or key.endswith(":style-name"):
                return value
        return None

    def iter_descendants(self) -> Iterator[Node]:
        """Yield all descendant nodes (not attributes) in document order."""
        stack = list(reversed(self.children))
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def ancestors(self) -> Iterator[Node]:
        node = self.parent
        while node is not None:
            yield node
            node = node.parent


@dataclass(frozen=True)
class Fragment:
    """An ordered collection of nodes, usually consecutive siblings."""

    nodes: tuple[Node, ...] = ()

    def __iter__(self) -> Iterator[Node]:
        return iter(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, item):
        return self.nodes[item]

    def __bool__(self) -> bool:
        return bool(self.nodes)


@dataclass(frozen=True)
class StyleEntry:
    parent: str | None = None
    properties: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class StyleTable:
    styles: Mapping[str, StyleEntry] = field(default_factory=dict)

    def __contains__(self, name: str) -> bool:
        return name in self.styles

    def get(self, name: str) -> StyleEntry | None:
        return self.styles.get(name)


@dataclass(frozen=True)
class LoadNote:
    """A non-fatal problem noticed while loading (reported as a yellow event)."""

    code: str
    message: str


@dataclass(frozen=True)
class DocumentTree:
    root: Node
    namespaces: Mapping[str, str] = field(default_factory=dict)
    styles: StyleTable = field(default_factory=StyleTable)
    resources: Mapping[str, bytes] = field(default_factory=dict)
    notes: tuple[LoadNote, ...] = ()


NodeLike = Union[Node, Fragment, Sequence[Node], None]


# ---------------------------------------------------------------------------
# tree construction


def _finish(root: Node) -> None:
    """Assign document order keys and freeze every node below ``root``."""
    serial = next(_tree_serials)
    counter = itertools.count()
    stack = [root]
    while stack:
        node = stack.pop()
        node.order = (serial, next(counter))
        for attr in node.attribute_nodes:
            attr.order = (serial, next(counter))
            object.__setattr__(attr, "_frozen", True)
        stack.extend(reversed(node.children))
        object.__setattr__(node, "_frozen", True)


def _link(parent: Node, children: list[Node]) -> None:
    for i, child in enumerate(children):
        child.parent = parent
        child.index = i
    parent.children = tuple(children)


def _make_attribute_nodes(element: Node) -> None:
    nodes = []
    for key, value in element.attributes.items():
        # namespace declarations are not attributes in the path model
        if key == "xmlns" or key.startswith("xmlns:"):
            continue
        attr = Node(ATTRIBUTE, key, value, synthetic=element.synthetic)
        attr.parent = element
        attr.index = len(nodes)
        nodes.append(attr)
    element.attribute_nodes = tuple(nodes)


def make_element(
    name: str,
    attributes: Mapping[str, str] | None = None,
    children: Iterable[Node | str] = (),
    *,
    synthetic: bool = True,
) -> Node:
    """Build an unattached element; strings become text nodes.

    The returned subtree is frozen. Use it as the root of a synthetic tree.
    """
    elem = _build_element(name, attributes, children, synthetic)
    _finish(elem)
    return elem


def _build_element(name, attributes, children, synthetic) -> Node:
    elem = Node(ELEMENT, name, attributes=attributes, synthetic=synthetic)
    _make_attribute_nodes(elem)
    kids = []
    for child in children:
        if isinstance(child, str):
            kids.append(Node(TEXT, text=child, synthetic=synthetic))
        else:
            kids.append(child)
    _link(elem, kids)
    return elem


def make_text(text: str) -> Node:
    """A frozen synthetic text node, never part of an input tree."""
    node = Node(TEXT, text=text, synthetic=True)
    _finish(node)
    return node


# ---------------------------------------------------------------------------
# loaders


class _TreeBuilder:
    def __init__(self) -> None:
        self.stack: list[tuple[Node, list[Node]]] = []
        self.root: Node | None = None
        self.namespaces: dict[str, str] = {}
        self.text: list[str] = []

    def _flush(self) -> None:
        if self.text and self.stack:
            self.stack[-1][1].append(Node(TEXT, text="".join(self.text)))
        self.text = []

    def start(self, name, attrs) -> None:
        self._flush()
        pairs = list(zip(attrs[::2], attrs[1::2]))
        for key, value in pairs:
            if key == "xmlns":
                self.namespaces.setdefault("", value)
            elif key.startswith("xmlns:"):
                self.namespaces.setdefault(key[6:], value)
        elem = Node(ELEMENT, name, attributes=dict(pairs))
        _make_attribute_nodes(elem)
        self.stack.append((elem, []))

    def end(self, name) -> None:
        self._flush()
        elem, children = self.stack.pop()
        _link(elem, children)
        if self.stack:
            self.stack[-1][1].append(elem)
        else:
            self.root = elem

    def data(self, text) -> None:
        if self.stack:
            self.text.append(text)


def _parse(data: bytes | str, source: str = "<xml>") -> tuple[Node, dict[str, str]]:
    builder = _TreeBuilder()
    parser = expat.ParserCreate()
    parser.ordered_attributes = True
    parser.buffer_text = True
    parser.StartElementHandler = builder.start
    parser.EndElementHandler = builder.end
    parser.CharacterDataHandler = builder.data
    try:
        parser.SetParamEntityParsing(expat.XML_PARAM_ENTITY_PARSING_NEVER)
        if isinstance(data, str):
            data = data.encode("utf-8")
        parser.Parse(data, True)
    except expat.ExpatError as exc:
        raise LoadError(
            f"{source}: {expat.errors.messages.get(exc.code, str(exc))}",
            line=exc.lineno,
            column=exc.offset + 1,
        ) from None
    if builder.root is None:
        raise LoadError(f"{source}: no root element")
    _finish(builder.root)
    return builder.root, builder.namespaces


def load_xml(data: bytes | str) -> DocumentTree:
    """Parse a well-formed XML document.

    Names keep their written prefixes; whitespace-only text is kept. Styles
    found in ``office:automatic-styles``/``office:styles`` (flat office XML)
    populate the style table.
    """
    root, namespaces = _parse(data)
    entries = _collect_styles(root)
    styles, notes = _build_style_table(entries)
    return DocumentTree(
        root=root,
        namespaces=MappingProxyType(namespaces),
        styles=styles,
        notes=tuple(notes),
    )


CONTENT_ENTRY = "content.xml"
STYLES_ENTRY = "styles.xml"
PICTURES_PREFIX = "Pictures/"


def load_office_container(data: bytes) -> DocumentTree:
    """Load a zipped office document (``content.xml`` plus optional extras)."""
    try:
        archive = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        raise LoadError(f"not a zip container: {exc}") from None
    with archive:
        names = archive.namelist()
        if CONTENT_ENTRY not in names:
            raise LoadError(f"container has no {CONTENT_ENTRY} entry")
        root, namespaces = _parse(archive.read(CONTENT_ENTRY), CONTENT_ENTRY)
        named: list[tuple[str, StyleEntry]] = []
        if STYLES_ENTRY in names:
            style_root, style_ns = _parse(archive.read(STYLES_ENTRY), STYLES_ENTRY)
            named = _collect_styles(style_root)
            for prefix, uri in style_ns.items():
                namespaces.setdefault(prefix, uri)
        resources = {
            name: archive.read(name)
            for name in names
            if name.startswith(PICTURES_PREFIX) and not name.endswith("/")
        }
    # content.xml definitions win on name collision
    styles, notes = _build_style_table(named + _collect_styles(root))
    return DocumentTree(
        root=root,
        namespaces=MappingProxyType(namespaces),
        styles=styles,
        resources=MappingProxyType(resources),
        notes=tuple(notes),
    )


_BOM = b"\xef\xbb\xbf"


def detect_format(data: bytes) -> str:
    """Return ``"container"`` or ``"xml"`` from the leading bytes."""
    if data[:2] == b"PK":
        return "container"
    head = data[len(_BOM):] if data.startswith(_BOM) else data
    if head.lstrip()[:1] == b"<":
        return "xml"
    raise LoadError("unrecognised input format (expected XML or zip container)")


def load_document(data: bytes, format: str = "auto") -> DocumentTree:
    if format == "auto":
        format = detect_format(data)
    if format == "container":
        return load_office_container(data)
    if format == "xml":
        return load_xml(data)
    raise ValueError(f"unknown format {format!r}")


# ---------------------------------------------------------------------------
# styles

_STYLE_ELEMENTS = ("style:style", "style:default-style")
_STYLE_CONTAINERS = ("office:automatic-styles", "office:styles")


def _collect_styles(root: Node) -> list[tuple[str, StyleEntry]]:
    found = []
    containers = [root] if root.name in _STYLE_CONTAINERS else []
    containers += [n for n in root.iter_descendants() if n.name in _STYLE_CONTAINERS]
    for container in containers:
        for node in container.children:
            if node.name != "style:style":
                continue
            name = node.attributes.get("style:name")
            if not name:
                continue
            props: dict[str, object] = {}
            for child in node.children:
                if child.is_element and child.name.endswith("properties"):
                    for key, value in child.attributes.items():
                        canon, parsed = _style_property(key, value)
                        props.setdefault(canon, parsed)
            found.append(
                (name, StyleEntry(node.attributes.get("style:parent-style-name"), props))
            )
    return found


def _style_property(key: str, value: str) -> tuple[str, object]:
    local = key.split(":", 1)[-1]
    if local == "font-weight":
        if value.isdigit():
            return "bold", int(value) >= 600
        return "bold", value.strip().lower() in ("bold", "bolder")
    if local == "font-style":
        return "italic", value.strip().lower() in ("italic", "oblique")
    if local in ("background-color", "text-background-color"):
        return "background-color", value.strip().lower()
    if local == "default-outline-level":
        try:
            return "heading-level", int(value)
        except ValueError:
            return "heading-level", value
    return key, value


def _build_style_table(
    entries: list[tuple[str, StyleEntry]],
) -> tuple[StyleTable, list[LoadNote]]:
    styles: dict[str, StyleEntry] = {}
    for name, entry in entries:
        styles[name] = entry
    notes = []
    for name in list(styles):
        seen = {name}
        current = name
        while True:
            parent = styles[current].parent
            if parent is None or parent not in styles:
                break
            if parent in seen:
                styles[current] = StyleEntry(None, styles[current].properties)
                notes.append(
                    LoadNote(
                        "style-cycle",
                        f"style inheritance cycle through {parent!r}; "
                        f"chain broken at {current!r}",
                    )
                )
                break
            seen.add(parent)
            current = parent
    return StyleTable(MappingProxyType(styles)), notes


def resolve_style(tree: DocumentTree, node: Node, prop: str):
    """Look ``prop`` up on the node's own style, then its parent styles."""
    name = node.style_name
    seen = set()
    while name is not None and name not in seen:
        seen.add(name)
        entry = tree.styles.get(name)
        if entry is None:
            return None
        if prop in entry.properties:
            return entry.properties[prop]
        name = entry.parent
    return None


def effective_style(tree: DocumentTree, node: Node, prop: str):
    """Like :func:`resolve_style` but inherited from the nearest styled ancestor."""
    current = node if node.is_element else node.parent
    while current is not None:
        value = resolve_style(tree, current, prop)
        if value is not None:
            return value
        current = current.parent
    return None


# ---------------------------------------------------------------------------
# text


def _as_nodes(value: NodeLike) -> Sequence[Node]:
    if value is None:
        return ()
    if isinstance(value, Node):
        return (value,)
    if isinstance(value, Fragment):
        return value.nodes
    return value


def iter_text_nodes(value: NodeLike) -> Iterator[Node]:
    for node in _as_nodes(value):
        if node.kind == TEXT:
            yield node
        elif node.kind == ELEMENT:
            for sub in node.iter_descendants():
                if sub.kind == TEXT:
                    yield sub


def text_of(value: NodeLike) -> str:
    """Concatenated descendant text; an attribute node yields its value."""
    parts = []
    for node in _as_nodes(value):
        if node.kind == ATTRIBUTE:
            parts.append(node.text)
        else:
            parts.extend(t.text for t in iter_text_nodes(node))
    return "".join(parts)


_WS = re.compile(r"\s+")


def normalize_space(text: str) -> str:
    return _WS.sub(" ", text).strip()


def is_blank_text(node: Node) -> bool:
    return node.kind == TEXT and not node.text.strip()


# ---------------------------------------------------------------------------
# cloning


def clone_span(nodes: Sequence[Node], start: int, end: int, *, reduce: bool = True) -> Fragment:
    """Clone the minimal structure covering text offsets ``[start, end)``.

    Offsets index into ``text_of(nodes)``. Text nodes crossing a boundary are
    split; elements carrying no covered text are dropped. With ``reduce`` the
    result is narrowed to the nearest common ancestor of the covered text.
    """
    if end <= start:
        return Fragment()
    offset = 0

    def clone(node: Node):
        nonlocal offset
        if node.kind == TEXT:
            lo, hi = offset, offset + len(node.text)
            offset = hi
            a, b = max(start, lo), min(end, hi)
            if a < b:
                return Node(TEXT, text=node.text[a - lo:b - lo], synthetic=True)
            return None
        if node.kind == ATTRIBUTE:
            return None
        kids = [c for c in (clone(child) for child in node.children) if c is not None]
        if not kids:
            return None
        return _build_element(node.name, node.attributes, kids, True)

    tops = [c for c in (clone(n) for n in nodes) if c is not None]
    while reduce and len(tops) == 1 and tops[0].kind == ELEMENT and len(tops[0].children) == 1:
        only = tops[0].children[0]
        only.parent = None
        tops = [only]
    for top in tops:
        top.parent = None
        _finish(top)
    return Fragment(tuple(tops))


def deep_clone(node: Node) -> Node:
    """A synthetic, frozen copy of ``node``'s subtree."""

    def build(n: Node) -> Node:
        if n.kind != ELEMENT:
            return Node(n.kind, n.name, n.text, synthetic=True)
        return _build_element(n.name, n.attributes, [build(c) for c in n.children], True)

    copy = build(node)
    _finish(copy)
    return copy


# ---------------------------------------------------------------------------
# serialization & hashing


def serialize(node: Node) -> str:
    """Serialize a node's structure back to XML text (no declaration)."""
    out: list[str] = []

    def walk(n: Node) -> None:
        if n.kind == TEXT:
            out.append(escape(n.text))
            return
        if n.kind == ATTRIBUTE:
            out.append(escape(n.text))
            return
        attrs = "".join(f" {k}={quoteattr(v)}" for k, v in n.attributes.items())
        if not n.children:
            out.append(f"<{n.name}{attrs}/>")
            return
        out.append(f"<{n.name}{attrs}>")
        for child in n.children:
            walk(child)
        out.append(f"</{n.name}>")

    walk(node)
    return "".join(out)


def tree_digest(tree: DocumentTree | Node) -> str:
    """Structural SHA-256 over names, attributes, text and styles."""
    root = tree.root if isinstance(tree, DocumentTree) else tree
    h = hashlib.sha256(serialize(root).encode("utf-8"))
    if isinstance(tree, DocumentTree):
        for name in sorted(tree.styles.styles):
            entry = tree.styles.styles[name]
            h.update(repr((name, entry.parent, sorted(entry.properties.items(), key=str))).encode())
        for name in sorted(tree.resources):
            h.update(name.encode())
            h.update(hashlib.sha256(tree.resources[name]).digest())
    return h.hexdigest()


def node_path(node: Node) -> str:
    """A positional location hint such as ``/doc/text:p[3]``."""
    parts = []
    current: Node | None = node
    while current is not None:
        if current.kind == TEXT:
            parts.append("text()")
        elif current.kind == ATTRIBUTE:
            parts.append(f"@{current.name}")
        else:
            parent = current.parent
            if parent is None:
                parts.append(current.name)
            else:
                same = [c for c in parent.children if c.name == current.name and c.is_element]
                pos = same.index(current) + 1
                parts.append(f"{current.name}[{pos}]")
        current = current.parent
    return "/" + "/".join(reversed(parts))


_SCOPE_CHAIN = ("office:body", "office:text", "body")


def scope_root(tree: DocumentTree) -> Node:
    """The element whose children form the top-level run scope.

    ``office:body`` (descending into ``office:text`` when present) for office
    content, ``body`` for XHTML, otherwise the document element.
    """
    node = tree.root
    for _ in range(3):
        nxt = next(
            (c for c in node.children if c.is_element and c.name in _SCOPE_CHAIN), None
        )
        if nxt is None:
            break
        node = nxt
    return node


def document_scope(tree: DocumentTree) -> Fragment:
    return Fragment(scope_root(tree).children)
