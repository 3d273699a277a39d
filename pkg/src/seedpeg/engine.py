"""Parse driver: per-parse state and the semantics of the primitive operators.

Before parsing, each reachable expression is compiled into a closure
``fn(pos) -> end`` that returns the end offset on success and ``-1`` on
failure. Syntax nodes go to a shared buffer (``state.nodes``); a failing
closure leaves the buffer exactly as it found it. The closures close over
the containers of one :class:`ParseState`, so a state (and its closures)
must not be shared between parses. Grammars can be shared freely.

Compilers for the non-primitive kinds live in their own modules and
register themselves with :func:`register`.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Any, Callable

from .expr import Expression, Grammar, Kind

Fn = Callable[[int], int]
Compiler = Callable[["ParseState", Expression, list, Callable[[int, int], None]], Fn]

COMPILERS: dict[Kind, Compiler] = {}
# Called with the state after every top-level invoke; used for instrumentation.
INVOKE_OBSERVERS: list[Callable[["ParseState"], None]] = []

# Stored outcome shape in seeds and memo tables: (end, nodes); end -1 is failure.
FAILED = (-1, ())
EOI_ID = -1


def register(*kinds: Kind):
    def deco(fn: Compiler) -> Compiler:
        for k in kinds:
            COMPILERS[k] = fn
        return fn
    return deco


class _Absent:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "ABSENT"

    def __bool__(self):
        return False


ABSENT = _Absent()


@dataclass(frozen=True)
class ParseOutcome:
    success: bool
    end: int | None = None
    nodes: tuple = ()
    start: int = 0

    @classmethod
    def from_raw(cls, start: int, end: int, nodes=()) -> "ParseOutcome":
        if end < 0:
            return cls(False, None, (), start)
        return cls(True, end, tuple(nodes), start)

    def consumed(self) -> int:
        return -1 if not self.success else self.end - self.start

    def consumed_more_than(self, other: "ParseOutcome") -> bool:
        """Success beats failure; between successes only a strictly larger end counts."""
        if not self.success:
            return False
        return not other.success or self.end > other.end


class ParseState:
    """Mutable state of one parse over one input.

    ``seeds`` maps ``(position, expression id)`` to a provisional
    ``(end, nodes)`` outcome; ``precedences`` maps cluster ids to their
    current precedence. Both, and ``blocked``, are empty between top-level
    invocations.
    """

    def __init__(self, grammar: Grammar, text: str, *, error_handler=None,
                 memo_strategy=None, extensions: dict | None = None):
        from .memo import FarthestErrorHandler, MemoRegistry

        self.grammar = grammar
        self.input = text
        self.position = 0
        self.seeds: dict[tuple[int, int], tuple] = {}
        self.blocked: set[int] = set()
        self.precedences: dict[int, int] = {}
        self.current_precedence = 0
        self.cluster_depth: dict[int, int] = {}
        self.suppress = 0
        self.error_watermark = -1
        self.nonws_watermark = 0
        # token end position -> end of its operand, before the skipped whitespace
        self.token_trim: dict[int, int] = {}
        self.peak_seeds = 0
        self.counters = [0] * (max(grammar.nodes, default=0) + 1)
        self.extensions: dict = dict(extensions or {})
        self.nodes: list = []
        self.error_handler = error_handler if error_handler is not None else FarthestErrorHandler()
        self.memo = memo_strategy if isinstance(memo_strategy, MemoRegistry) else MemoRegistry(memo_strategy)
        self._fns: dict[int, Fn] = {}
        self._quiet_fns: dict[int, Fn] = {}
        self._ws: Fn | None = None

    # -- compilation -------------------------------------------------------

    def _report(self, i: int, pos: int) -> None:
        self.error_handler.on_failure(i, pos, self)

    def compiled(self, i: int, quiet: bool = False) -> Fn:
        """The closure for node ``i``; ``quiet`` variants never report failures."""
        cache = self._quiet_fns if quiet else self._fns
        fn = cache.get(i)
        if fn is None:
            limit = sys.getrecursionlimit()
            if limit < 20000:
                sys.setrecursionlimit(20000)
            fn = self._compile(i, cache, _noop if quiet else self._report, quiet)
        return fn

    def _compile(self, i: int, cache: dict, fail, quiet: bool) -> Fn:
        nodes = self.grammar.nodes
        pending: set[int] = set()

        def get(j: int) -> Fn:
            fn = cache.get(j)
            if fn is not None:
                return fn
            if j in pending:
                return lambda pos: cache[j](pos)
            pending.add(j)
            node = nodes[j]
            kids = [get(c) for c in node.children]
            try:
                compiler = COMPILERS[node.kind]
            except KeyError:
                raise TypeError(f"cannot parse {node.kind.value} nodes; resolve references first") from None
            fn = compiler(self, node, kids, fail)
            cache[j] = fn
            pending.discard(j)
            return fn

        return get(i)

    def whitespace_fn(self) -> Fn | None:
        if self._ws is None and self.grammar.whitespace is not None:
            # a token inside the whitespace expression reaches back here mid-compile
            self._ws = lambda pos: ws(pos)
            ws = self.compiled(self.grammar.whitespace, quiet=True)
            self._ws = ws
        return self._ws

    # -- introspection -----------------------------------------------------

    @property
    def memo_suppressed(self) -> bool:
        return self.suppress > 0

    @property
    def invocation_counters(self) -> dict[int, int]:
        return {i: n for i, n in enumerate(self.counters) if n}

    def invoke(self, expr: Expression | int) -> ParseOutcome:
        """Invoke one expression at ``self.position``; advance it on success."""
        i = expr if isinstance(expr, int) else expr.id
        start = self.position
        mark = len(self.nodes)
        end = self.compiled(i)(start)
        produced = self.nodes[mark:]
        del self.nodes[mark:]
        if end >= 0:
            self.position = end
        for observer in INVOKE_OBSERVERS:
            observer(self)
        return ParseOutcome.from_raw(start, end, produced)


def _noop(i: int, pos: int) -> None:
    pass


def invoke(expression: Expression | int, state: ParseState) -> ParseOutcome:
    return state.invoke(expression)


def parse_root(grammar: Grammar, text: str, *, full_match: bool = False,
               **options) -> tuple[ParseOutcome, ParseState]:
    """Invoke the grammar's root rule at offset 0.

    With ``full_match`` the outcome is a failure unless the whole input was
    consumed; the end-of-input check is reported to the error handler like
    any other failing expression.
    """
    if any(n.kind is Kind.REFERENCE for n in grammar.nodes.values()):
        raise ValueError("grammar has unresolved references; run prepare() first")
    state = ParseState(grammar, text, **options)
    outcome = state.invoke(grammar.root_id)
    if full_match and outcome.success and outcome.end != len(text):
        state.error_handler.on_failure(EOI_ID, outcome.end, state)
        outcome = ParseOutcome(False, None, (), 0)
    return outcome, state


# -- extension objects ----------------------------------------------------------

def read_extension(target: ParseState | Expression, key: Any, default: Any = ABSENT) -> Any:
    return target.extensions.get(key, default)


def write_extension(target: ParseState | Expression, key: Any, value: Any) -> None:
    target.extensions[key] = value


# -- terminals ----------------------------------------------------------------------

@register(Kind.LITERAL)
def _literal(state: ParseState, node: Expression, kids, fail) -> Fn:
    text = state.input
    counts = state.counters
    i = node.id
    s = node["text"]
    n = len(s)
    if n == 1:
        limit = len(text)

        def literal_char(pos):
            counts[i] += 1
            if pos < limit and text[pos] == s:
                return pos + 1
            fail(i, pos)
            return -1
        return literal_char

    def literal(pos):
        counts[i] += 1
        if text.startswith(s, pos):
            return pos + n
        fail(i, pos)
        return -1
    return literal


@register(Kind.CHAR_CLASS)
def _char_class(state: ParseState, node: Expression, kids, fail) -> Fn:
    text = state.input
    limit = len(text)
    counts = state.counters
    i = node.id
    ranges = node["ranges"]
    if sum(ord(hi) - ord(lo) + 1 for lo, hi in ranges) <= 1024:
        members = frozenset(chr(c) for lo, hi in ranges for c in range(ord(lo), ord(hi) + 1))

        def char_set(pos):
            counts[i] += 1
            if pos < limit and text[pos] in members:
                return pos + 1
            fail(i, pos)
            return -1
        return char_set

    def char_ranges(pos):
        counts[i] += 1
        if pos < limit:
            c = text[pos]
            for lo, hi in ranges:
                if lo <= c <= hi:
                    return pos + 1
        fail(i, pos)
        return -1
    return char_ranges


@register(Kind.ANY_CHAR)
def _any_char(state: ParseState, node: Expression, kids, fail) -> Fn:
    limit = len(state.input)
    counts = state.counters
    i = node.id

    def any_char(pos):
        counts[i] += 1
        if pos < limit:
            return pos + 1
        fail(i, pos)
        return -1
    return any_char


# -- composites -----------------------------------------------------------------------

@register(Kind.SEQUENCE)
def _sequence(state: ParseState, node: Expression, kids, fail) -> Fn:
    counts = state.counters
    nodes = state.nodes
    i = node.id
    kids = tuple(kids)
    if len(kids) == 2:
        a, b = kids

        def seq2(pos):
            counts[i] += 1
            mark = len(nodes)
            p = a(pos)
            if p >= 0:
                p = b(p)
                if p >= 0:
                    return p
                del nodes[mark:]
            fail(i, pos)
            return -1
        return seq2

    if len(kids) == 3:
        a, b, c = kids

        def seq3(pos):
            counts[i] += 1
            mark = len(nodes)
            p = a(pos)
            if p >= 0:
                p = b(p)
                if p >= 0:
                    p = c(p)
                    if p >= 0:
                        return p
                del nodes[mark:]
            fail(i, pos)
            return -1
        return seq3

    def seq(pos):
        counts[i] += 1
        mark = len(nodes)
        p = pos
        for f in kids:
            p = f(p)
            if p < 0:
                del nodes[mark:]
                fail(i, pos)
                return -1
        return p
    return seq


@register(Kind.CHOICE)
def _choice(state: ParseState, node: Expression, kids, fail) -> Fn:
    counts = state.counters
    i = node.id
    kids = tuple(kids)

    def choice(pos):
        counts[i] += 1
        for f in kids:
            end = f(pos)
            if end >= 0:
                return end
        fail(i, pos)
        return -1
    return choice


@register(Kind.ZERO_OR_MORE, Kind.ONE_OR_MORE)
def _repeat(state: ParseState, node: Expression, kids, fail) -> Fn:
    counts = state.counters
    i = node.id
    (child,) = kids
    at_least_one = node.kind is Kind.ONE_OR_MORE

    def repeat(pos):
        counts[i] += 1
        p = child(pos)
        if p < 0:
            if at_least_one:
                fail(i, pos)
                return -1
            return pos
        # stop on an empty match: it would repeat forever
        while p > pos:
            pos = p
            p = child(pos)
            if p < 0:
                return pos
        return p
    return repeat


@register(Kind.OPTIONAL)
def _optional(state: ParseState, node: Expression, kids, fail) -> Fn:
    counts = state.counters
    i = node.id
    (child,) = kids

    def optional(pos):
        counts[i] += 1
        end = child(pos)
        return pos if end < 0 else end
    return optional


@register(Kind.AND_PREDICATE, Kind.NOT_PREDICATE)
def _predicate(state: ParseState, node: Expression, kids, fail) -> Fn:
    counts = state.counters
    nodes = state.nodes
    i = node.id
    (child,) = kids
    want = node.kind is Kind.AND_PREDICATE

    def predicate(pos):
        counts[i] += 1
        mark = len(nodes)
        ok = child(pos) >= 0
        if ok:
            del nodes[mark:]
        if ok is want:
            return pos
        fail(i, pos)
        return -1
    return predicate


@register(Kind.TRACE)
def _trace(state: ParseState, node: Expression, kids, fail) -> Fn:
    """Reports (label, position, end, depth) to the ``"trace"`` extension sink."""
    counts = state.counters
    ext = state.extensions
    i = node.id
    (child,) = kids
    label = node["label"]

    def trace(pos):
        counts[i] += 1
        depth = ext.get("trace.depth", 0)
        ext["trace.depth"] = depth + 1
        try:
            end = child(pos)
        finally:
            ext["trace.depth"] = depth
        sink = ext.get("trace")
        if sink is not None:
            sink(label, pos, end, depth)
        if end < 0:
            fail(i, pos)
        return end
    return trace


# Importing these registers the compilers for the remaining kinds.
from . import cluster, leftrec, memo, tree  # noqa: E402,F401
