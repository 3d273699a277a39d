from __future__ import annotations

from pathlib import Path

import pytest

from seedpeg import engine
from seedpeg.dsl import load_grammar

GRAMMARS = Path(__file__).resolve().parent.parent / "grammars"


class HygieneLog:
    """Checks every top-level invoke leaves no seeds, blocks or precedences behind."""

    def __init__(self):
        self.checked = 0
        self.violations = []

    def __call__(self, state):
        self.checked += 1
        leftover = {
            "seeds": dict(state.seeds),
            "blocked": set(state.blocked),
            "precedences": dict(state.precedences),
            "cluster_depth": {k: v for k, v in state.cluster_depth.items() if v},
            "suppress": state.suppress,
            "current_precedence": state.current_precedence,
        }
        dirty = {k: v for k, v in leftover.items() if v}
        if dirty:
            self.violations.append(dirty)
            raise AssertionError(f"parse state not clean after top-level invoke: {dirty}")


HYGIENE = HygieneLog()
engine.INVOKE_OBSERVERS.append(HYGIENE)


def pytest_terminal_summary(terminalreporter):
    terminalreporter.write_line(
        f"parse-state hygiene: {HYGIENE.checked} top-level invocations checked, "
        f"{len(HYGIENE.violations)} violations")


@pytest.fixture(scope="session")
def hygiene():
    return HYGIENE


def corpus_path(name: str) -> Path:
    return GRAMMARS / name


def load_corpus(name: str):
    return load_grammar(corpus_path(name).read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def grammar_a():
    return load_corpus("layered_right.peg")


@pytest.fixture(scope="session")
def grammar_b():
    return load_corpus("idiomatic.peg")


@pytest.fixture(scope="session")
def grammar_c():
    return load_corpus("layered_left.peg")


@pytest.fixture(scope="session")
def grammar_d():
    return load_corpus("cluster.peg")


@pytest.fixture(scope="session")
def grammar_d_tree():
    return load_corpus("cluster_tree.peg")
