"""Seeded random generators for documents, patterns and rule sets.

Each generator returns the XML handed to the package together with a plain
Python description the oracles consume, so expected values never come from
the code under test.
"""

from __future__ import annotations

import random
from xml.sax.saxutils import escape

from oracles import OracleBlockType, norm, preorder, text

# -- regexp blocks -----------------------------------------------------------------

_CHARS = "ab1 :\n"


def _chunk(rnd: random.Random) -> str:
    return escape("".join(rnd.choice(_CHARS) for _ in range(rnd.randint(1, 4))))


def random_block_xml(rnd: random.Random) -> str:
    """A root whose children (1-3) form a block: paragraphs with nested runs."""
    kids = []
    for _ in range(rnd.randint(1, 3)):
        if rnd.random() < 0.15:
            kids.append(_chunk(rnd))
            continue
        parts = []
        for _ in range(rnd.randint(0, 4)):
            r = rnd.random()
            if r < 0.5:
                parts.append(_chunk(rnd))
            elif r < 0.8:
                parts.append(f"<b>{_chunk(rnd)}</b>")
            else:
                parts.append(f"<i><b>{_chunk(rnd)}</b>{_chunk(rnd)}</i>")
        kids.append(f"<p>{''.join(parts)}</p>")
    return f"<r>{''.join(kids)}</r>"


_ATOMS = ["a", "b", r"\d", " ", ".", ":", "[ab]", r"\s", r"\w", "1"]
_QUANT = ["", "", "", "*", "+", "?"]


def random_pattern(rnd: random.Random) -> str:
    atoms = [rnd.choice(_ATOMS) + rnd.choice(_QUANT) for _ in range(rnd.randint(1, 4))]
    r = rnd.random()
    if r < 0.45:
        i = rnd.randrange(len(atoms))
        j = rnd.randint(i + 1, len(atoms))
        atoms[i:j] = ["(" + "".join(atoms[i:j]) + ")" + ("?" if rnd.random() < 0.25 else "")]
    pattern = "".join(atoms)
    if rnd.random() < 0.1:
        pattern = f"{rnd.choice(_ATOMS)}|({pattern})"
    return pattern


# -- block-construction documents ----------------------------------------------------

_WORDS = ["x", "y", "z", "Ende", "x y", "y z", ""]

START_PATHS = {
    "/p": lambda scope: [n for n in scope if n.kind == "element" and n.name == "p"],
    "/h": lambda scope: [n for n in scope if n.kind == "element" and n.name == "h"],
    "/p | /h": lambda scope: [n for n in scope if n.kind == "element" and n.name in ("p", "h")],
    "/*": lambda scope: [n for n in scope if n.kind == "element"],
    "descendant-or-self::q": lambda scope: [
        d for n in scope for d in preorder(n) if d.kind == "element" and d.name == "q"
    ],
    "/p[contains(text(),'x')]": lambda scope: [
        n for n in scope if n.kind == "element" and n.name == "p" and "x" in text(n)
    ],
}

CONDITIONS = {
    "": lambda node: True,
    '<Condition type="textContains" value="y"/>': lambda node: "y" in norm(text(node)),
    '<Condition type="not"><Condition type="textContains" value="z"/></Condition>':
        lambda node: "z" not in norm(text(node)),
    '<Condition type="or"><Condition type="textEquals" value="x"/>'
    '<Condition type="textStartsWith" value="Ende"/></Condition>':
        lambda node: norm(text(node)) == "x" or norm(text(node)).startswith("Ende"),
}

GROUP_EXPRS = {
    "descendant-or-self::*[contains(text(),'x')]": lambda n: n.kind == "element" and "x" in text(n),
    "descendant-or-self::*[contains(text(),'Ende')]": lambda n: n.kind == "element" and "Ende" in text(n),
    "self::p": lambda n: n.kind == "element" and n.name == "p",
    "self::*": lambda n: n.kind == "element",
}

GROUPINGS = ["NONE", "GROUPING_EXPRESSION", "END_EXPRESSION", "NEXT_BLOCK"]


def _child(rnd: random.Random) -> str:
    r = rnd.random()
    if r < 0.12:
        return "\n  "
    if r < 0.18:
        return "t"
    name = rnd.choice(["p", "p", "h", "q"])
    body = escape(rnd.choice(_WORDS))
    if rnd.random() < 0.25:
        body += f"<q>{escape(rnd.choice(_WORDS))}</q>"
        if rnd.random() < 0.5:
            body += f"<q>{escape(rnd.choice(_WORDS))}</q>"
    return f"<{name}>{body}</{name}>"


def random_case(rnd: random.Random, max_children: int = 40, max_types: int = 3):
    """Return (document xml, rule-set xml, oracle block types)."""
    doc = "<r>" + "".join(_child(rnd) for _ in range(rnd.randint(0, max_children))) + "</r>"
    types = []
    blocks_xml = []
    for i in range(rnd.randint(1, max_types)):
        start = rnd.choice(list(START_PATHS))
        cond = rnd.choice(list(CONDITIONS))
        grouping = rnd.choice(GROUPINGS)
        expr = rnd.choice(list(GROUP_EXPRS))
        if grouping in ("GROUPING_EXPRESSION", "END_EXPRESSION"):
            group_xml = f'<Grouping type="{grouping}"><GroupingExpression matches="{expr}"/></Grouping>'
        elif grouping == "NEXT_BLOCK":
            group_xml = '<Grouping type="NEXT_BLOCK"/>'
        else:
            group_xml = ""
        bid = f"b{i}"
        blocks_xml.append(
            f'<Block ID="{bid}"><Definition><Start matches="{start}"/>{cond}{group_xml}'
            f"</Definition></Block>"
        )
        types.append(OracleBlockType(bid, START_PATHS[start], CONDITIONS[cond], grouping,
                                     GROUP_EXPRS[expr]))
    ruleset = f'<RuleSet ID="rs">{"".join(blocks_xml)}</RuleSet>'
    return doc, ruleset, types
