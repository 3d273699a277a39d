"""Memoization strategies, the Memo expression, and farthest-failure error reporting."""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, NamedTuple

from .engine import EOI_ID, FAILED, register
from .expr import Grammar, Kind


class MemoKey(NamedTuple):
    expression: int
    position: int
    precedence: int | None = None


class MemoStrategy:
    """Unbounded table keyed by (expression, position)."""

    def __init__(self):
        self.table: dict = {}

    def key(self, expr_id: int, position: int, state) -> MemoKey:
        return MemoKey(expr_id, position)

    def lookup(self, key: MemoKey):
        return self.table.get(key)

    def store(self, key: MemoKey, outcome) -> None:
        self.table[key] = outcome

    def __len__(self) -> int:
        return len(self.table)


class PrecedenceMemo(MemoStrategy):
    """Adds the current precedence to the key, for grammars using Precedence nodes."""

    def key(self, expr_id: int, position: int, state) -> MemoKey:
        return MemoKey(expr_id, position, state.current_precedence)


class BoundedMemo(MemoStrategy):
    """Keeps at most ``capacity`` entries, evicting the least recently stored."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"memo capacity must be >= 1, got {capacity}")
        super().__init__()
        self.capacity = capacity
        self.table = OrderedDict()

    def store(self, key: MemoKey, outcome) -> None:
        table = self.table
        if key in table:
            table.move_to_end(key)
        table[key] = outcome
        if len(table) > self.capacity:
            table.popitem(last=False)


def bounded_memo_strategy(capacity: int) -> BoundedMemo:
    return BoundedMemo(capacity)


def _named_strategy(selector: str) -> MemoStrategy:
    if selector in ("default", "pair"):
        return MemoStrategy()
    if selector == "precedence":
        return PrecedenceMemo()
    if selector.startswith("bounded:"):
        return BoundedMemo(int(selector.split(":", 1)[1]))
    raise ValueError(f"unknown memo strategy {selector!r}")


class MemoRegistry:
    """Per-parse strategy instances, one per selector named by Memo nodes.

    ``default`` is a factory (or a selector string) used for Memo nodes whose
    selector is ``"default"``; a dict maps selectors to factories.
    """

    def __init__(self, default: Callable[[], MemoStrategy] | str | dict | None = None):
        self.factories: dict[str, Callable[[], MemoStrategy]] = {}
        if isinstance(default, dict):
            self.factories.update(default)
        elif isinstance(default, str):
            self.factories["default"] = lambda: _named_strategy(default)
        elif default is not None:
            self.factories["default"] = default
        self.instances: dict[str, MemoStrategy] = {}

    def get(self, selector: str) -> MemoStrategy:
        inst = self.instances.get(selector)
        if inst is None:
            factory = self.factories.get(selector)
            inst = factory() if factory else _named_strategy(selector)
            self.instances[selector] = inst
        return inst

    def size(self) -> int:
        return sum(len(s) for s in self.instances.values())


@register(Kind.MEMO)
def compile_memo(state, node, kids, fail):
    counts = state.counters
    nodes = state.nodes
    i = node.id
    (operand,) = kids
    target = node.children[0]
    strategy = state.memo.get(node["strategy"])
    key_of, lookup, store = strategy.key, strategy.lookup, strategy.store

    def memo(pos):
        counts[i] += 1
        if state.suppress:
            end = operand(pos)
        else:
            key = key_of(target, pos, state)
            hit = lookup(key)
            if hit is None:
                mark = len(nodes)
                end = operand(pos)
                store(key, FAILED if end < 0 else (end, tuple(nodes[mark:])))
            else:
                end, produced = hit
                if produced:
                    nodes.extend(produced)
        if end < 0:
            fail(i, pos)
        return end
    return memo


# -- error reporting --------------------------------------------------------------

def describe(grammar: Grammar, i: int) -> str:
    """Short human-readable description of a node, used for unlabeled failures."""
    if i == EOI_ID:
        return "end of input"
    node = grammar.nodes[i]
    kind = node.kind
    if kind is Kind.LITERAL:
        return "'" + node["text"].replace("\\", "\\\\").replace("'", "\\'") + "'"
    if kind is Kind.CHAR_CLASS:
        parts = [lo if lo == hi else f"{lo}-{hi}" for lo, hi in node["ranges"]]
        return "[" + "".join(parts) + "]"
    if kind is Kind.ANY_CHAR:
        return "any character"
    if kind is Kind.NOT_PREDICATE:
        child = grammar.nodes[node.children[0]]
        if child.kind is Kind.ANY_CHAR:
            return "end of input"
        return "not " + describe(grammar, child.id)
    if kind is Kind.AND_PREDICATE:
        return describe(grammar, node.children[0])
    suffix = {Kind.ZERO_OR_MORE: "*", Kind.ONE_OR_MORE: "+", Kind.OPTIONAL: "?"}.get(kind)
    if suffix:
        return describe(grammar, node.children[0]) + suffix
    if kind is Kind.CAPTURE:
        return node["name"]
    if kind in (Kind.TOKEN, Kind.MEMO, Kind.TRACE):
        return describe(grammar, node.children[0])
    return kind.value


def _parents(grammar: Grammar) -> dict[int, int]:
    """First parent of each node in breadth-first order from the rules."""
    parent: dict[int, int] = {}
    seen = set(grammar.entry_points())
    frontier = list(grammar.entry_points())
    while frontier:
        nxt = []
        for i in frontier:
            for c in grammar.nodes[i].children:
                if c not in seen:
                    seen.add(c)
                    parent[c] = i
                    nxt.append(c)
        frontier = nxt
    return parent


_SOURCES = frozenset({Kind.LITERAL, Kind.CHAR_CLASS, Kind.ANY_CHAR,
                      Kind.AND_PREDICATE, Kind.NOT_PREDICATE})


def expectation_labels(grammar: Grammar) -> tuple[dict[int, str], dict[int, str]]:
    """Expectation label and enclosing token label for every failure source.

    A failure source is a terminal or predicate. Its label is the name of
    the nearest enclosing labelled token, capture or rule (the node itself
    counts); failing that, the description of the outermost unlabelled
    token, or of the node itself.
    """
    rule_names = grammar.rule_names()
    parent = _parents(grammar)
    own: dict[int, str] = {}
    for i in grammar.reachable():
        node = grammar.nodes[i]
        if node.kind is Kind.CAPTURE:
            own[i] = node["name"]
        elif i in rule_names:
            own[i] = rule_names[i]
        elif node.kind is Kind.TOKEN and node["label"]:
            own[i] = node["label"]
    labels, tokens = {}, {}
    for i in grammar.reachable():
        if grammar.nodes[i].kind not in _SOURCES:
            continue
        j, label, token = i, None, None
        while j is not None and label is None:
            label = own.get(j)
            if token is None and grammar.nodes[j].kind is Kind.TOKEN:
                token = j
            j = parent.get(j)
        if label is None and token is not None:
            label = describe(grammar, grammar.nodes[token].children[0])
        labels[i] = label or describe(grammar, i)
        if token is not None:
            tokens[i] = own.get(token) or label
    return labels, tokens


@dataclass(frozen=True)
class ErrorReport:
    position: int
    line: int
    column: int
    expectations: frozenset[str]
    token_context: str | None = None

    @property
    def failed(self) -> bool:
        return self.position >= 0

    def __str__(self) -> str:
        labels = ", ".join(sorted(self.expectations))
        return f"error at {self.line}:{self.column}: expected one of {{{labels}}}"


def line_column(text: str, position: int) -> tuple[int, int]:
    """1-based line and column of an offset."""
    line = text.count("\n", 0, position) + 1
    start = text.rfind("\n", 0, position) + 1
    return line, position - start + 1


class FarthestErrorHandler:
    """Tracks the farthest failure position and the expressions failing there."""

    def __init__(self):
        self.position = -1
        self.failed_ids: set[int] = set()

    def on_failure(self, expr_id: int, position: int, state) -> None:
        if position > self.position:
            self.position = position
            state.error_watermark = position
            self.failed_ids = {expr_id}
        elif position == self.position:
            self.failed_ids.add(expr_id)

    def report(self, state) -> ErrorReport:
        if self.position < 0:
            return ErrorReport(-1, 0, 0, frozenset())
        labels, tokens = expectation_labels(state.grammar)
        labels[EOI_ID] = "end of input"
        found = {labels[i] for i in self.failed_ids if i in labels}
        context = next((tokens[i] for i in sorted(self.failed_ids) if i in tokens), None)
        line, col = line_column(state.input, self.position)
        return ErrorReport(self.position, line, col, frozenset(found), context)


def farthest_error_handler() -> FarthestErrorHandler:
    return FarthestErrorHandler()
