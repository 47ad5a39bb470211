"""Independent reference implementations used as test oracles.

None of these import the package's evaluation code. Trees are walked
through the public ``Node`` attributes only (kind, name, text, children).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence

from lxml import etree


# ---------------------------------------------------------------------------
# plain tree helpers


def text(node) -> str:
    if node.kind == "text":
        return node.text
    if node.kind == "attribute":
        return node.text
    return "".join(text(c) for c in node.children)


def norm(s: str) -> str:
    return " ".join(s.split())


def preorder(root) -> list:
    out = []

    def walk(n):
        out.append(n)
        for c in n.children:
            walk(c)

    walk(root)
    return out


def is_blank(node) -> bool:
    return node.kind == "text" and node.text.strip() == ""


# ---------------------------------------------------------------------------
# block construction


@dataclass
class OracleBlockType:
    """A block type described by plain Python predicates.

    ``starts(scope)`` returns the start candidates (any order);
    ``condition(node)`` is the start condition; ``grouping`` is one of
    NONE / GROUPING_EXPRESSION / END_EXPRESSION / NEXT_BLOCK and ``member(sib)``
    decides whether a sibling matches the grouping expression.
    """

    id: str
    starts: Callable[[Sequence], list]
    condition: Callable[[object], bool]
    grouping: str
    member: Callable[[object], bool] | None = None


def oracle_blocks(types: Sequence[OracleBlockType], scope: Sequence, root) -> list[tuple[str, list]]:
    """Enumerate every start node, then expand each block by definition."""
    rank = {id(n): i for i, n in enumerate(preorder(root))}
    owner: dict[int, tuple] = {}
    for bt in types:
        for node in sorted(bt.starts(scope), key=lambda n: rank[id(n)]):
            if id(node) not in owner and bt.condition(node):
                owner[id(node)] = (node, bt)
    starts = sorted(owner.values(), key=lambda item: rank[id(item[0])])
    top = [id(n) for n in scope]
    result = []
    for node, bt in starts:
        if id(node) in top:
            following = list(scope)[top.index(id(node)) + 1:]
        elif node.parent is not None:
            sibs = list(node.parent.children)
            following = sibs[[id(s) for s in sibs].index(id(node)) + 1:]
        else:
            following = []
        members = [node]
        if bt.grouping != "NONE":
            pending = []
            for sib in following:
                if is_blank(sib):
                    pending.append(sib)
                    continue
                if bt.grouping == "NEXT_BLOCK":
                    keep = id(sib) not in owner
                elif bt.grouping == "GROUPING_EXPRESSION":
                    keep = bt.member(sib)
                else:
                    keep = not bt.member(sib)
                if not keep:
                    break
                members += pending + [sib]
                pending = []
        result.append((bt.id, members))
    return result


# ---------------------------------------------------------------------------
# regular expressions over concatenated text


def regex_oracle(pattern: str, block_text: str) -> str | None:
    m = re.search(pattern, block_text)
    if m is None:
        return None
    if m.re.groups >= 1 and m.group(1) is not None:
        return m.group(1)
    return m.group(0)


# ---------------------------------------------------------------------------
# reference XPath via lxml


def lxml_eval(xml: str, expr: str, context: str) -> list[tuple]:
    """Evaluate ``expr`` with lxml and return node keys.

    ``context`` is "root-children" (absolute expressions: the children of
    the document element act as the top level) or "root" (relative
    expressions evaluated with the document element as the context node).
    Keys: ("e", preorder index among elements) or ("a", element index, name).
    Predicates on ``text()`` are rewritten to ``string(.)``.
    """
    doc = etree.fromstring(xml.encode("utf-8"))
    nsmap = {k: v for k, v in doc.nsmap.items() if k}
    elements = [e for e in doc.iter() if isinstance(e.tag, str)]
    index = {e: i for i, e in enumerate(elements)}
    translated = expr.replace("text()", "string(.)")

    def branch_exprs(src: str) -> list[str]:
        out = []
        for part in src.split("|"):
            part = part.strip()
            if part.startswith("/"):
                part = part[1:]
                if part.startswith("descendant-or-self::"):
                    part = "descendant::" + part[len("descendant-or-self::"):]
            out.append(part)
        return out

    results = []
    for part in branch_exprs(translated):
        for hit in doc.xpath(part, namespaces=nsmap):
            results.append(hit)
    keys = set()
    for hit in results:
        if isinstance(hit, etree._Element):
            keys.add(("e", index[hit]))
        else:  # attribute value result
            parent = hit.getparent()
            keys.add(("a", index[parent], _qname(hit.attrname, parent.nsmap)))
    return sorted(keys, key=lambda k: (k[1], 0 if k[0] == "e" else 1, _attr_pos(elements, k)))


def _qname(clark: str, nsmap: dict) -> str:
    if clark.startswith("{"):
        uri, local = clark[1:].split("}")
        for prefix, u in nsmap.items():
            if u == uri and prefix:
                return f"{prefix}:{local}"
    return clark


def _attr_pos(elements, key) -> int:
    if key[0] != "a":
        return 0
    el = elements[key[1]]
    names = [_qname(a, el.nsmap) for a in el.attrib]
    return names.index(key[2])


def package_keys(root, nodes) -> list[tuple]:
    """Translate package nodes to the same keys ``lxml_eval`` produces."""
    elements = [n for n in preorder(root) if n.kind == "element"]
    index = {id(e): i for i, e in enumerate(elements)}
    keys = []
    for n in nodes:
        if n.kind == "element":
            keys.append(("e", index[id(n)]))
        else:
            keys.append(("a", index[id(n.parent)], n.name))
    return keys


# ---------------------------------------------------------------------------
# colour pairing


def colour_pairs(section_runs: Sequence[tuple[str, str]], diagnoses: Sequence[tuple[str, str]]) -> int:
    """Count (section run, diagnosis) pairs sharing a colour, case-insensitively."""
    return sum(
        1
        for _, c1 in section_runs
        for _, c2 in diagnoses
        if c1.lower() == c2.lower()
    )
