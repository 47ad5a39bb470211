"""Training-case import from discharge-letter style office documents.

Headings are paragraphs that start with a bold run ending in a colon. Every
heading opens a section; the headings ``Untersuchungen``, ``Diagnosen`` and
``Therapie`` additionally populate the examinations, diagnoses and therapies
terminologies. Text runs in ordinary sections that share a background colour
with a diagnosis are linked to it. Pictures referenced in a section are
copied to ``<output-dir>/media`` under a content-digest filename.

Use as a CLI plugin::

    ruleblocks --plugin ruleblocks.caseimport --input letter.sxw --output case.xml
"""

from __future__ import annotations

import hashlib
import posixpath
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from .actions import Action, PostAction, PreAction, check_params
from .context import RED, YELLOW, Block, ExtractionContext
from .docmodel import (
    TEXT,
    Fragment,
    Node,
    clone_span,
    is_blank_text,
    normalize_space,
    resolve_style,
    text_of,
)
from .rulemodel import Registry
from .selectors import CachedSelector, StyledSelector, regex_span
from .xmlout import OutElement, OutputCursor, append_copy, new_cursor, serialize

TITLE_PATTERN = re.compile(r"\s*(.*)\s*:")

TERMINOLOGIES = ("examinations", "diagnoses", "therapies")
TERMINOLOGY_HEADINGS = {
    "Untersuchungen": "examinations",
    "Diagnosen": "diagnoses",
    "Therapie": "therapies",
}

LIST_ELEMENTS = frozenset({"text:list", "text:ordered-list", "text:unordered-list", "ul", "ol"})
ITEM_ELEMENTS = frozenset({"text:list-item", "li"})
LINE_BREAKS = frozenset({"text:line-break", "br"})

_STATE = "caseimport"


@dataclass
class _CaseState:
    sections: int = 0
    # (section id, run text, colour)
    runs: list[tuple[str, str, str]] = field(default_factory=list)
    # (entry id, name, colours)
    diagnoses: list[tuple[str, str, tuple[str, ...]]] = field(default_factory=list)
    entry_counts: dict[str, int] = field(default_factory=dict)
    entry_index: dict[tuple[str, str], OutElement] = field(default_factory=dict)
    media: set[str] = field(default_factory=set)


def _state(cursor: OutputCursor) -> _CaseState:
    return cursor.document.extras.setdefault(_STATE, _CaseState())


def _cursor(obj) -> OutputCursor:
    if not isinstance(obj, OutputCursor):
        raise TypeError(f"user object must be an OutputCursor, got {type(obj).__name__}")
    return obj


def _child(parent: OutElement, name: str) -> OutElement:
    found = parent.elements(name)
    if found:
        return found[-1]
    elem = OutElement(name)
    parent.append(elem)
    return elem


def _case_root(cursor: OutputCursor) -> OutElement:
    return cursor.document.root


# ---------------------------------------------------------------------------
# heading, title and content


class _Heading:
    """Locates the leading heading run of a block's first paragraph."""

    def __init__(self, params: Mapping[str, str]) -> None:
        check_params(params, optional=("property", "value"))
        self.styled = StyledSelector(
            params.get("property", "bold"), params.get("value", "true"), "true"
        )

    def span(self, block: Block, ctx: ExtractionContext):
        scope, spans = self.styled.spans(block, ctx)
        if not spans:
            ctx.emit(YELLOW, "no-heading", "block does not start with a heading run")
            return None
        return scope, spans[0]


class TitleSelector(CachedSelector):
    """Heading text without the trailing colon."""

    def __init__(self, params: Mapping[str, str]) -> None:
        self.heading = _Heading(params)

    def handle_get(self, block, ctx):
        found = self.heading.span(block, ctx)
        if found is None:
            return None
        scope, (lo, hi) = found
        run_text = text_of(scope)[lo:hi]
        span = regex_span(TITLE_PATTERN, run_text)
        if span is None:
            ctx.emit(YELLOW, "no-heading", "heading run has no trailing colon")
            return None
        return clone_span(scope, lo + span[0], lo + span[1])


class ContentSelector(CachedSelector):
    """The block with its heading run removed."""

    def __init__(self, params: Mapping[str, str]) -> None:
        self.heading = _Heading(params)

    def handle_get(self, block, ctx):
        found = self.heading.span(block, ctx)
        if found is None:
            return None
        scope, (lo, hi) = found
        first = scope[0]
        rest = clone_span((first,), hi, len(text_of(first)), reduce=False)
        nodes = [n for n in rest.nodes if normalize_space(text_of(n))]
        nodes.extend(n for n in block.nodes.nodes[1:] if not is_blank_text(n))
        return Fragment(tuple(nodes))


def heading_title(block: Block, ctx: ExtractionContext) -> str | None:
    result = TitleSelector({}).handle_get(block, ctx)
    return None if result is None else normalize_space(text_of(result))


# ---------------------------------------------------------------------------
# colour helpers


def _colour(ctx: ExtractionContext, node: Node) -> str | None:
    if ctx.tree is None or not node.is_element:
        return None
    value = resolve_style(ctx.tree, node, "background-color")
    if not isinstance(value, str):
        return None
    value = value.strip().lower()
    if not value or value == "transparent":
        return None
    return value


def coloured_runs(ctx: ExtractionContext, nodes) -> list[tuple[str, str]]:
    """(text, colour) for the outermost elements carrying a background colour."""
    runs = []

    def walk(node: Node) -> None:
        colour = _colour(ctx, node)
        if colour is not None:
            text = normalize_space(text_of(node))
            if text:
                runs.append((text, colour))
            return
        for child in node.children:
            walk(child)

    for node in nodes:
        walk(node)
    return runs


def _colours(ctx: ExtractionContext, nodes) -> tuple[str, ...]:
    seen: list[str] = []
    for node in nodes:
        for elem in (node, *node.iter_descendants()):
            colour = _colour(ctx, elem)
            if colour is not None and colour not in seen:
                seen.append(colour)
    return tuple(seen)


# ---------------------------------------------------------------------------
# terminology parsing


@dataclass
class Entry:
    name: str
    colours: tuple[str, ...] = ()
    children: list["Entry"] = field(default_factory=list)


def _lines(paragraph: Node) -> list[list[Node]]:
    lines: list[list[Node]] = [[]]
    for child in paragraph.children:
        if child.is_element and child.name in LINE_BREAKS:
            lines.append([])
        else:
            lines[-1].append(child)
    return lines


def _parse_list(ctx, node: Node) -> list[Entry]:
    entries = []
    for item in node.children:
        if not (item.is_element and item.name in ITEM_ELEMENTS):
            continue
        own = [c for c in item.children if not (c.is_element and c.name in LIST_ELEMENTS)]
        nested = [c for c in item.children if c.is_element and c.name in LIST_ELEMENTS]
        name = normalize_space(" ".join(text_of(c) for c in own))
        children = [e for sub in nested for e in _parse_list(ctx, sub)]
        if name:
            entries.append(Entry(name, _colours(ctx, own), children))
        else:
            entries.extend(children)
    return entries


def parse_terminology(ctx: ExtractionContext, content) -> list[Entry]:
    """Entries from list items (keeping nesting) and non-empty paragraph lines."""
    entries: list[Entry] = []
    for node in content:
        if not node.is_element:
            text = normalize_space(node.text) if node.kind == TEXT else ""
            if text:
                entries.append(Entry(text))
            continue
        if node.name in LIST_ELEMENTS:
            entries.extend(_parse_list(ctx, node))
            continue
        for line in _lines(node):
            name = normalize_space("".join(text_of(n) for n in line))
            if name:
                own = _colour(ctx, node)
                colours = _colours(ctx, line) or ((own,) if own else ())
                entries.append(Entry(name, colours))
    return entries


# ---------------------------------------------------------------------------
# actions


class BeginCase(PreAction):
    """Creates the case skeleton and returns a cursor at the case root."""

    def __init__(self, params, source=None) -> None:
        check_params(params)

    def pre(self, parent, block, ctx):
        cursor = _cursor(parent)
        root = _case_root(cursor)
        for name in ("metadata", "sections"):
            _child(root, name)
        terms = _child(root, "terminologies")
        for kind in TERMINOLOGIES:
            _child(terms, kind)
        _child(root, "relations")
        _state(cursor)
        return cursor.at(root)


class EndCase(PostAction):
    """Links coloured section runs to same-coloured diagnoses."""

    def __init__(self, params, source=None) -> None:
        check_params(params)

    def post(self, parent, child, block, ctx):
        cursor = _cursor(child)
        state = _state(cursor)
        relations = _child(_case_root(cursor), "relations")
        for section_id, text, colour in state.runs:
            for entry_id, _, colours in state.diagnoses:
                if colour in colours:
                    relations.append(OutElement("relation", {
                        "section": section_id,
                        "diagnosis": entry_id,
                        "color": colour,
                        "text": text,
                    }))
        run_colours = {c for _, _, c in state.runs}
        diag_colours = {c for _, _, cs in state.diagnoses for c in cs}
        for colour in sorted(run_colours - diag_colours):
            ctx.emit(YELLOW, "dangling-color", f"colour {colour} marks text but no diagnosis")
        for colour in sorted(diag_colours - run_colours):
            ctx.emit(YELLOW, "dangling-color", f"colour {colour} marks a diagnosis but no text")


def relations(state_runs, diagnoses) -> list[tuple[str, str, str, str]]:
    """(section, diagnosis, colour, text) links; mirrors :class:`EndCase`."""
    return [
        (sid, eid, colour, text)
        for sid, text, colour in state_runs
        for eid, _, colours in diagnoses
        if colour in colours
    ]


class SectionAction(Action, PreAction):
    """Opens a ``section`` for a heading block and copies its content.

    Returns a cursor at the new section, so an inner rule set writes there.
    """

    def __init__(self, params, source=None) -> None:
        self.title = TitleSelector(params)
        self.content = ContentSelector(params)

    def _open(self, cursor: OutputCursor, block: Block, ctx: ExtractionContext) -> OutputCursor:
        state = _state(cursor)
        title_frag = self.title.get(block, ctx)
        title = normalize_space(text_of(title_frag)) if title_frag is not None else ""
        content = self.content.get(block, ctx) or Fragment()
        state.sections += 1
        section_id = f"s{state.sections}"
        section = OutElement("section", {"id": section_id, "title": title})
        _child(_case_root(cursor), "sections").append(section)
        namespaces = ctx.tree.namespaces if ctx.tree is not None else {}
        append_copy(section, content, cursor.document, namespaces)
        if title not in TERMINOLOGY_HEADINGS:
            for text, colour in coloured_runs(ctx, content):
                state.runs.append((section_id, text, colour))
        return cursor.at(section)

    def perform(self, block, user_object, ctx):
        return self._open(_cursor(user_object), block, ctx)

    def pre(self, parent, block, ctx):
        return self._open(_cursor(parent), block, ctx)


class EndSection(PostAction):
    def __init__(self, params, source=None) -> None:
        check_params(params)

    def post(self, parent, child, block, ctx):
        return None


class TerminologyAction(Action):
    """Adds the block's content to one terminology, keeping list nesting."""

    def __init__(self, params, source=None) -> None:
        check_params(params, required=("kind",), optional=("property", "value"))
        self.kind = params["kind"]
        if self.kind not in TERMINOLOGIES:
            raise ValueError(f"kind must be one of {', '.join(TERMINOLOGIES)}")
        self.content = ContentSelector({k: v for k, v in params.items() if k != "kind"})

    def perform(self, block, user_object, ctx):
        cursor = _cursor(user_object)
        state = _state(cursor)
        content = self.content.get(block, ctx)
        entries = parse_terminology(ctx, content or ())
        if not entries:
            ctx.emit(YELLOW, "empty-terminology", f"no {self.kind} entries found")
            return
        terms = _child(_child(_case_root(cursor), "terminologies"), self.kind)
        self._write(terms, entries, state)

    def _write(self, parent: OutElement, entries: list[Entry], state: _CaseState) -> None:
        for entry in entries:
            key = (self.kind, entry.name)
            elem = state.entry_index.get(key)
            if elem is None:
                n = state.entry_counts.get(self.kind, 0) + 1
                state.entry_counts[self.kind] = n
                attrs = {"id": f"{self.kind}-{n}", "name": entry.name}
                if entry.colours:
                    attrs["color"] = entry.colours[0]
                elem = OutElement("entry", attrs)
                parent.append(elem)
                state.entry_index[key] = elem
                if self.kind == "diagnoses":
                    state.diagnoses.append((attrs["id"], entry.name, entry.colours))
            self._write(elem, entry.children, state)


_HREF_KEYS = ("xlink:href", "href", "src")


class ImageAction(Action):
    """Copies a referenced picture to ``<output-dir>/media`` and records it."""

    def __init__(self, params, source=None) -> None:
        check_params(params)

    def perform(self, block, user_object, ctx):
        cursor = _cursor(user_object)
        image = block.start
        href = next((image.attributes[k] for k in _HREF_KEYS if k in image.attributes), None)
        if not href:
            ctx.emit(RED, "image-missing", "image element has no reference")
            return
        name = href.lstrip("#")
        tree = ctx.tree
        data = tree.resources.get(name) if tree is not None else None
        if data is None:
            ctx.emit(RED, "image-missing", f"picture {name!r} is not in the container")
            return
        ext = posixpath.splitext(name)[1].lower()
        filename = f"media/{hashlib.sha256(data).hexdigest()[:16]}{ext}"
        state = _state(cursor)
        out_dir = ctx.config.output_dir
        if out_dir is not None and filename not in state.media:
            target = Path(out_dir) / filename
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(data)
        state.media.add(filename)
        cursor.node.append(OutElement("image", {"file": filename, "alt": _alt_text(image)}))


def _alt_text(image: Node) -> str:
    for holder in (image, image.parent):
        if holder is None:
            continue
        for child in holder.children:
            if child.is_element and child.name in ("svg:title", "svg:desc"):
                text = normalize_space(text_of(child))
                if text:
                    return text
    for holder in (image, image.parent):
        if holder is not None:
            for key in ("alt", "draw:name"):
                if holder.attributes.get(key):
                    return holder.attributes[key]
    return ""


# ---------------------------------------------------------------------------
# plugin surface

_LEGACY = "de.d3web.caseParser."


def _selector_factory(cls):
    def build(params):
        return cls(params)

    return build


def register(registry: Registry) -> Registry:
    registry.register_selector(
        "caseimport.title", _selector_factory(TitleSelector), _LEGACY + "selectors.TitleSelector"
    )
    registry.register_selector(
        "caseimport.content", _selector_factory(ContentSelector), _LEGACY + "selectors.ContentSelector"
    )
    registry.register_action("caseimport.beginCase", BeginCase)
    registry.register_action("caseimport.endCase", EndCase)
    registry.register_action(
        "caseimport.section", SectionAction, _LEGACY + "actions.examinations.StartCaseParagraph"
    )
    registry.register_action("caseimport.endSection", EndSection, _LEGACY + "actions.examinations.EndCaseParagraph")
    registry.register_action("caseimport.terminology", TerminologyAction)
    registry.register_action("caseimport.image", ImageAction, _LEGACY + "actions.ImageExtraction")
    return registry


def default_ruleset() -> Path:
    return Path(str(resources.files("ruleblocks") / "rules" / "caseimport.rules.xml"))


def new_user_object() -> OutputCursor:
    return new_cursor("case")


__all__ = [
    "ContentSelector",
    "Entry",
    "TitleSelector",
    "default_ruleset",
    "new_user_object",
    "parse_terminology",
    "register",
    "relations",
    "serialize",
]
