from __future__ import annotations

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from seedpeg import (DSLError, Kind, ResolutionError, cluster_groups,
                     detect_left_cycles, dump_grammar, isomorphic, load_grammar, parse_root)
from seedpeg.dsl import _meta_grammar, read_grammar

from conftest import GRAMMARS

ARITH_CLUSTER = ("E = expr -> E '+' E @+ @left_recur -> E '-' E -> E '*' E @+ @left_recur "
            "-> E '/' E -> [0-9] @+ ;")


def test_arith_cluster_groups():
    g = load_grammar(ARITH_CLUSTER)
    node = g.nodes[g.root_id]
    assert node.kind is Kind.CLUSTER
    assert [(c.precedence, c.left_assoc, len(c.ops)) for c in cluster_groups(node)] == [
        (3, False, 1), (2, True, 2), (1, True, 2)]


def test_hidden_recursion_wrapped():
    g = load_grammar("X = Y? X ; Y = 'y' ;")
    assert g.nodes[g.rules["X"]].kind is Kind.LEFT_RECURSIVE
    assert list(g.auto_marked.values()) == ["rule X"]


def test_missing_rule():
    with pytest.raises(ResolutionError, match="unresolved reference B"):
        load_grammar("A = B ; ")


@pytest.mark.parametrize("text, line, column", [
    ("A = ;", 1, 5),
    ("A = 'x' ;\nB = 'y' |;", 2, 10),
    ("A = 'x ;", 1, 9),
    ("A = 'x'", 1, 8),
    ("# comment\n\nA == 'x' ;", 3, 4),
])
def test_syntax_errors_located(text, line, column):
    with pytest.raises(DSLError) as info:
        read_grammar(text)
    assert (info.value.line, info.value.column) == (line, column)
    assert str(info.value).startswith(f"{line}:{column}: syntax error")


def test_duplicate_rule():
    with pytest.raises(DSLError, match="duplicate rule A"):
        read_grammar("A = 'a' ; A = 'b' ;")


def test_reversed_range():
    with pytest.raises(DSLError, match="reversed range"):
        read_grammar("A = [z-a] ;")


def test_cluster_error_located():
    with pytest.raises(DSLError, match="first alternate") as info:
        read_grammar("\nE = expr -> E '+' E @+ -> E '-' E @left_recur -> [0-9] @+ ;")
    assert info.value.line == 2


def test_unknown_start():
    with pytest.raises(DSLError, match="unknown rule"):
        read_grammar("%start Q\nA = 'a' ;")


def test_start_directive():
    g = load_grammar("%start B\nA = 'a' ; B = 'b' ;")
    assert g.root == "B" and parse_root(g, "b")[0].success


def test_whitespace_directive_and_default():
    g = load_grammar("%whitespace Blank\nA = %token('a') ; Blank = ' '* ;")
    assert g.whitespace == g.rules["Blank"]
    assert load_grammar("A = %token('a') ; WS = ' '* ;").whitespace is not None
    assert load_grammar("A = %token('a') ;").whitespace is None


def test_string_and_class_escapes():
    g = load_grammar(r"A = 'it\'s\\\n\t' [\]\-a\\] ;")
    lit, cls = (g.nodes[c] for c in g.nodes[g.root_id].children)
    assert lit["text"] == "it's\\\n\t"
    assert set(cls["ranges"]) == {("]", "]"), ("-", "-"), ("a", "a"), ("\\", "\\")}


def test_every_form_loads():
    g = load_grammar("""
    # one of everything
    A = &'a' !'b' . 'c'* 'd'+ 'e'? ('f' | 'g'):cap ('h'):rec$
        %token('i') %memo('j') %left_recur(A 'k' | 'l') %left_assoc(A 'm' | 'n')
        %escape('o') %precedence(3, 'p') [q-s] ;
    """)
    kinds = {n.kind for n in g.nodes.values()}
    assert kinds >= set(Kind) - {Kind.REFERENCE, Kind.CLUSTER, Kind.TRACE}


def test_names_may_start_with_keyword():
    g = load_grammar("A = expression ; expression = 'x' ;")
    assert parse_root(g, "x")[0].success


def test_loader_is_bootstrapped():
    meta = _meta_grammar()
    kinds = {n.kind for n in meta.nodes.values()}
    assert {Kind.SEQUENCE, Kind.CHOICE, Kind.ZERO_OR_MORE, Kind.NOT_PREDICATE,
            Kind.TOKEN, Kind.CAPTURE} <= kinds
    assert not any(n.kind is Kind.REFERENCE for n in meta.nodes.values())


# -- dump ----------------------------------------------------------------------------------


CORPUS = sorted(p.name for p in GRAMMARS.glob("*.peg"))


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_round_trip(name):
    g = load_grammar((GRAMMARS / name).read_text(encoding="utf-8"))
    assert isomorphic(load_grammar(dump_grammar(g)), g)


def test_auto_marked_dumped_explicitly():
    g = load_grammar((GRAMMARS / "layered_left.peg").read_text())
    text = dump_grammar(g)
    assert text.count("%left_recur(") == len(g.auto_marked) == 2
    resolved = read_grammar(text)
    from seedpeg import resolve_references
    assert detect_left_cycles(resolve_references(resolved), skip_breakers=True) == []


def test_cluster_dump_syntax():
    text = dump_grammar(load_grammar(ARITH_CLUSTER))
    assert text.strip() == ARITH_CLUSTER


def test_dump_start_and_whitespace():
    g = load_grammar("%start B\n%whitespace Blank\nA = %token('a') ; B = A A ; Blank = ' '* ;")
    text = dump_grammar(g)
    assert "%start B" in text and "%whitespace Blank" in text
    assert isomorphic(load_grammar(text), g)


@st.composite
def grammar_texts(draw):
    names = ["A", "B", "C"][:draw(st.integers(1, 3))]
    atoms = st.sampled_from(names + ["'a'", "'\\''", "[a-c\\]]", ".", "''"])
    forms = st.sampled_from(["{}", "{}?", "{}*", "{}+", "&{}", "!{}", "{}:n", "{}:t$",
                             "%token({})", "%memo({})", "%escape({})", "%precedence(2, {})",
                             "({} | 'z')"])
    rules = []
    for n in names:
        if draw(st.booleans()) and draw(st.booleans()):
            arms = []
            for k in range(draw(st.integers(1, 3))):
                body = " ".join(draw(forms).format(draw(atoms)) for _ in range(draw(st.integers(1, 2))))
                inc = " @+" if k == 0 or draw(st.booleans()) else ""
                left = " @left_recur" if inc and draw(st.booleans()) else ""
                arms.append(f"-> {n} {body}{inc}{left}")
            arms.append("-> 'x' @+")
            rules.append(f"{n} = expr {' '.join(arms)} ;")
        else:
            alts = [" ".join(draw(forms).format(draw(atoms)) for _ in range(draw(st.integers(1, 3))))
                    for _ in range(draw(st.integers(1, 3)))]
            rules.append(f"{n} = {' | '.join(alts)} ;")
    return "\n".join(rules)


@settings(max_examples=150, deadline=None)
@given(grammar_texts())
def test_round_trip_property(text):
    try:
        g = load_grammar(text)
    except ResolutionError:
        assume(False)
    again = load_grammar(dump_grammar(g))
    assert isomorphic(again, g)
    assert dump_grammar(again) == dump_grammar(g)
