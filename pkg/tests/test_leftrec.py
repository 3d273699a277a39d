from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seedpeg import GrammarBuilder, Kind, ParseState, load_grammar, parse_root, prepare

from oracles import left_leaning, op_tree, right_leaning

RIGHT = load_grammar("E = (E '-' E):sub | N ; N = [0-9]:num$ ;")
LEFT = load_grammar("E = %left_assoc((E '-' N):sub | N) ; N = [0-9]:num$ ;")
# left-recursive only: the structure forces a left-leaning tree
LAYERED = load_grammar("E = (E '-' N):sub | N ; N = [0-9]:num$ ;")


def tree(grammar, text):
    outcome, _ = parse_root(grammar, text, full_match=True)
    assert outcome.success, text
    (node,) = outcome.nodes
    return op_tree(node)


def test_unmarked_both_recursive_is_right_assoc():
    assert tree(RIGHT, "8-3-2") == ("sub", "8", ("sub", "3", "2"))


def test_left_assoc_wrapper():
    assert tree(LEFT, "8-3-2") == ("sub", ("sub", "8", "3"), "2")


def test_auto_wrapper_is_right_assoc():
    node = RIGHT.nodes[RIGHT.rules["E"]]
    assert node.kind is Kind.LEFT_RECURSIVE and not node["left_assoc"]


def test_seed_loop_runs_twice_on_single_digit():
    """Pass 1 grows the seed from failure to "7"; pass 2 finds no growth."""
    g = load_grammar("E = E '-' N | N ; N = [0-9] ;")
    wrapper = g.rules["E"]
    operand = g.nodes[wrapper].children[0]
    _, state = parse_root(g, "7")
    # one top-level call plus one seed hit per pass
    assert state.counters[wrapper] == 3
    assert state.counters[operand] == 2


def test_seed_loop_on_three_operands():
    g = load_grammar("E = E '-' N | N ; N = [0-9] ;")
    operand = g.nodes[g.rules["E"]].children[0]
    _, state = parse_root(g, "1-2-3")
    # failure -> 1 -> 1-2 -> 1-2-3 -> no growth
    assert state.counters[operand] == 4


def test_blocked_right_recursion_stops_growth():
    g = load_grammar("E = %left_assoc(E '-' E | N) ; N = [0-9] ;")
    assert parse_root(g, "1-2")[0].end == 1


def test_escape_reenables_recursion():
    g = load_grammar("E = %left_assoc(E '-' %escape(E) | N) ; N = [0-9] ;")
    reference = load_grammar("E = N '-' E | N ; N = [0-9] ;")
    for text in ("1-2", "1", "1-2-3"):
        assert parse_root(g, text)[0].end == parse_root(reference, text)[0].end == len(text)


def test_escape_is_noop_when_nothing_blocked():
    plain = load_grammar("A = 'a'+ ;")
    escaped = load_grammar("A = %escape('a'+) ;")
    for text in ("", "a", "aaa", "b"):
        assert parse_root(plain, text)[0] == parse_root(escaped, text)[0]


def test_escape_restores_blocked_after_failure():
    b = GrammarBuilder()
    esc = b.escape(b.lit("x"))
    b.rule("R", esc)
    g = prepare(b.grammar())
    state = ParseState(g, "y")
    state.blocked.add(99)
    outcome = state.compiled(esc)(0)
    assert outcome < 0 and state.blocked == {99}
    state.blocked.clear()


def test_escape_in_brackets():
    g = load_grammar(open_corpus("precedence.peg"))
    outcome, _ = parse_root(g, "9-(4-2)-1", full_match=True)
    assert outcome.success
    (node,) = outcome.nodes
    assert [c.name for c in node.walk()].count("sub") == 3


# -- precedence wrapper ------------------------------------------------------------------


def precedence_probe(level):
    """Grammar R = %precedence(level, trace(.)) recording currentPrecedence inside."""
    b = GrammarBuilder()
    inner = b.trace(b.any(), "inner")
    wrapper = b.precedence(level, inner)
    b.rule("R", wrapper)
    g = prepare(b.grammar())
    return g, wrapper, inner


def test_precedence_lower_than_current_fails():
    g, wrapper, inner = precedence_probe(2)
    state = ParseState(g, "x")
    state.current_precedence = 3
    assert state.compiled(wrapper)(0) < 0
    assert state.counters[inner] == 0
    assert state.current_precedence == 3
    state.current_precedence = 0


def test_precedence_raised_for_operand():
    g, wrapper, _ = precedence_probe(2)
    seen = []
    state = ParseState(g, "x")
    state.extensions["trace"] = lambda *e: seen.append(state.current_precedence)
    assert state.invoke(wrapper).end == 1
    assert seen == [2]
    assert state.current_precedence == 0


def test_nested_equal_levels():
    g = load_grammar("R = %precedence(2, %precedence(2, 'a')) ;")
    assert parse_root(g, "a")[0].end == 1


def test_nested_lower_level_fails():
    g = load_grammar("R = %precedence(2, %precedence(1, 'a')) ;")
    assert not parse_root(g, "a")[0].success


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 4), st.integers(0, 4), st.sampled_from(["a", "b"]))
def test_precedence_restored(level, entry, text):
    b = GrammarBuilder()
    wrapper = b.precedence(level, b.lit("a"))
    b.rule("R", wrapper)
    state = ParseState(prepare(b.grammar()), text)
    state.current_precedence = entry
    state.compiled(wrapper)(0)
    assert state.current_precedence == entry
    state.current_precedence = 0


# -- properties --------------------------------------------------------------------------------


chains = st.lists(st.sampled_from("0123456789"), min_size=1, max_size=12).map("-".join)


@settings(max_examples=100, deadline=None)
@given(chains)
def test_right_leaning_default(text):
    assert right_leaning(tree(RIGHT, text))


@settings(max_examples=100, deadline=None)
@given(chains)
def test_left_leaning_when_marked(text):
    assert left_leaning(tree(LEFT, text))
    assert tree(LEFT, text) == tree(LAYERED, text)


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="1-", max_size=20))
def test_seed_loop_bounded_by_input(text):
    g = load_grammar("E = E '-' N | N ; N = [0-9] ;")
    operand = g.nodes[g.rules["E"]].children[0]
    _, state = parse_root(g, text)
    assert state.counters[operand] <= len(text) + 2


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="12-()", max_size=12))
def test_hygiene_after_random_inputs(text):
    for g in (RIGHT, LEFT, LAYERED):
        _, state = parse_root(g, text)
        assert not state.seeds and not state.blocked


def open_corpus(name):
    from conftest import corpus_path
    return corpus_path(name).read_text(encoding="utf-8")
