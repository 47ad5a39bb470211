import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruleblocks import conditions as C
from ruleblocks.context import Block, EngineConfig, ExtractionContext
from ruleblocks.docmodel import Fragment, load_xml
from ruleblocks.selectors import SelectorSpec, position_factory, regexp_factory, xpath_factory


def block_of(xml, ordinal=1):
    tree = load_xml(xml)
    nodes = tuple(tree.root.children)
    return Block("t", Fragment(nodes), nodes[0] if nodes else None, ordinal)


def ev(cond, block, config=None):
    return C.evaluate(cond, block, ExtractionContext(config))


def regexp(pattern):
    return SelectorSpec("regexp", (("regexp", pattern),), regexp_factory({"regexp": pattern}))


def xpath(expr):
    return SelectorSpec("xpath", (("xpath", expr),), xpath_factory({"xpath": expr}))


HEADING = r"\s*(.*)\s*:"


# -- terminal kinds --------------------------------------------------------------------


def test_text_equals():
    assert ev(C.Terminal("textEquals", value="abc"), block_of("<r><p>abc</p></r>"))


def test_exists_with_heading_regexp():
    assert ev(C.Terminal("exists", regexp(HEADING)), block_of("<r><p>Anamnese:</p></r>"))


def test_heading_condition_false_on_non_paragraph():
    cond = C.Composite("and", (C.Terminal("paragraphStart"), C.Terminal("exists", regexp(HEADING))))
    assert not ev(cond, block_of("<r><table>Anamnese:</table></r>"))
    assert ev(cond, block_of('<r xmlns:text="urn:t"><text:p>Anamnese:</text:p></r>'))


def test_minmax_above_max():
    t = C.Terminal("exists")
    assert not ev(C.Composite("minmax", (t, t, t), 1, 2), block_of("<r><p/></r>"))


def test_not_of_absent():
    assert ev(C.Composite("not", (C.Terminal("exists", xpath("self::z")),)), block_of("<r><p/></r>"))


@pytest.mark.parametrize("kind, value, expected", [
    ("textContains", "b c", True),
    ("textStartsWith", "a b", True),
    ("textEndsWith", "c d", True),
    ("textEndsWith", "c", False),
    ("textMatches", r"a.*d", True),
    ("textMatches", r"b.*", False),  # anchored
    ("textEquals", "a b c d", True),
])
def test_comparisons_on_normalized_text(kind, value, expected):
    block = block_of("<r><p>  a  b\n c <i>d</i> </p></r>")
    assert ev(C.Terminal(kind, value=value), block) is expected


@pytest.mark.parametrize("text, value, expected", [
    ("42", "42", True), (" 42 ", "42", True), ("+7", "7", True), ("-3", "-3", True),
    ("4 2", "42", False), ("4.2", "4", False), ("x", "1", False),
])
def test_int_equals(text, value, expected):
    assert ev(C.Terminal("intEquals", value=value), block_of(f"<r><p>{text}</p></r>")) is expected


def test_int_equals_with_position():
    spec = SelectorSpec("position", (), position_factory({}))
    cond = C.Terminal("intEquals", spec, "2")
    assert ev(cond, block_of("<r><p/></r>", ordinal=2))
    assert not ev(cond, block_of("<r><p/></r>", ordinal=1))


def test_absent_selector_fails_every_comparison():
    block = block_of("<r><p>x</p></r>")
    for kind in C.VALUE_KINDS:
        value = "1" if kind == "intEquals" else ""
        assert not ev(C.Terminal(kind, xpath("self::z"), value), block)
    assert not ev(C.Terminal("exists", xpath("self::z")), block)


def test_paragraph_start_uses_configured_set():
    block = block_of("<r><para>x</para></r>")
    assert not ev(C.Terminal("paragraphStart"), block)
    assert ev(C.Terminal("paragraphStart"), block, EngineConfig(paragraph_elements=frozenset({"para"})))
    for name in ["text:p", "text:h", "p", "h1", "h6"]:
        assert ev(C.Terminal("paragraphStart"), block_of(f'<r xmlns:text="urn:t"><{name}/></r>'))


def test_empty_composites():
    block = block_of("<r><p/></r>")
    assert ev(C.Composite("and", ()), block)
    assert not ev(C.Composite("or", ()), block)


# -- validation ----------------------------------------------------------------------------


@pytest.mark.parametrize("make", [
    lambda: C.Terminal("textEquals"),
    lambda: C.Terminal("intEquals", value="x"),
    lambda: C.Terminal("textMatches", value="("),
    lambda: C.Composite("not", ()),
    lambda: C.Composite("minmax", (C.ALWAYS,), None, 1),
    lambda: C.Composite("minmax", (C.ALWAYS,), 0, 2),
    lambda: C.Composite("minmax", (C.ALWAYS, C.ALWAYS), 2, 1),
    lambda: C.Composite("minmax", (C.ALWAYS,), -1, 1),
])
def test_invalid_conditions_rejected(make):
    with pytest.raises(ValueError):
        make()


def test_aliases():
    assert C.canonical_kind("contains") == "textContains"
    assert C.canonical_kind("min-max") == "minmax"
    assert C.canonical_kind("ParagraphStart") == "paragraphStart"
    assert C.canonical_kind("bogus") is None


# -- properties -------------------------------------------------------------------------------

TRUE = C.Terminal("exists")
FALSE = C.Terminal("exists", xpath("self::z"))
BLOCK = block_of("<r><p>x</p></r>")


@st.composite
def cond_trees(draw, depth=0):
    if depth >= 3 or draw(st.integers(0, 3)) == 0:
        return draw(st.sampled_from([TRUE, FALSE, C.Terminal("textEquals", value="x"),
                                     C.Terminal("textContains", value="q")]))
    kind = draw(st.sampled_from(["and", "or", "not", "minmax"]))
    if kind == "not":
        return C.Composite("not", (draw(cond_trees(depth=depth + 1)),))
    kids = tuple(draw(st.lists(cond_trees(depth=depth + 1), max_size=3)))
    if kind == "minmax":
        lo = draw(st.integers(0, len(kids)))
        hi = draw(st.integers(lo, len(kids)))
        return C.Composite("minmax", kids, lo, hi)
    return C.Composite(kind, kids)


@settings(max_examples=300, deadline=None)
@given(st.lists(cond_trees(), max_size=4))
def test_de_morgan(children):
    ctx = ExtractionContext()
    lhs = C.evaluate(C.Composite("not", (C.Composite("and", tuple(children)),)), BLOCK, ctx)
    rhs = C.evaluate(C.Composite("or", tuple(C.Composite("not", (c,)) for c in children)), BLOCK, ctx)
    assert lhs == rhs


def test_minmax_brute_force():
    ctx = ExtractionContext()
    for n in range(0, 6):
        for outcomes in itertools.product([False, True], repeat=n):
            kids = tuple(TRUE if o else FALSE for o in outcomes)
            for k in range(0, n + 1):
                got = C.evaluate(C.Composite("minmax", kids, k, k), BLOCK, ctx)
                assert got == (sum(outcomes) == k)


words = st.lists(st.text(alphabet="abcäö", min_size=1, max_size=4), min_size=1, max_size=4)


@settings(max_examples=200, deadline=None)
@given(words, st.sampled_from(["", " ", "\n ", "\t"]), st.sampled_from(["", " ", "\n"]))
def test_text_equals_whitespace_invariant(ws, lead, trail):
    value = " ".join(ws)
    padded = lead + "  ".join(ws) + trail
    cond = C.Terminal("textEquals", value=value)
    assert ev(cond, block_of(f"<r><p>{value}</p></r>"))
    assert ev(cond, block_of(f"<r><p>{padded}</p></r>"))


@settings(max_examples=100, deadline=None)
@given(cond_trees())
def test_evaluation_is_deterministic(cond):
    assert ev(cond, BLOCK) == ev(cond, BLOCK)
