"""Parsing-expression graphs and the passes that prepare them for parsing.

A grammar is a table of :class:`Expression` records keyed by integer id, plus
a map from rule names to root ids. Edges are child ids, so the graph may be
cyclic once references are resolved. Graphs are never mutated after
construction: every pass returns a new :class:`Grammar`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, Iterator, Mapping


class Kind(str, enum.Enum):
    LITERAL = "Literal"
    CHAR_CLASS = "CharClass"
    ANY_CHAR = "AnyChar"
    SEQUENCE = "Sequence"
    CHOICE = "Choice"
    ZERO_OR_MORE = "ZeroOrMore"
    ONE_OR_MORE = "OneOrMore"
    OPTIONAL = "Optional"
    AND_PREDICATE = "AndPredicate"
    NOT_PREDICATE = "NotPredicate"
    REFERENCE = "Reference"
    LEFT_RECURSIVE = "LeftRecursive"
    PRECEDENCE = "Precedence"
    CLUSTER = "Cluster"
    CAPTURE = "Capture"
    TOKEN = "Token"
    MEMO = "Memo"
    ESCAPE_LEFT_BLOCK = "EscapeLeftBlock"
    TRACE = "Trace"


TERMINALS = frozenset({Kind.LITERAL, Kind.CHAR_CLASS, Kind.ANY_CHAR, Kind.REFERENCE})
NARY = frozenset({Kind.SEQUENCE, Kind.CHOICE, Kind.CLUSTER})
# Kinds whose out-edges do not count towards left-recursive cycles.
CYCLE_BREAKERS = frozenset({Kind.LEFT_RECURSIVE, Kind.CLUSTER})

_REQUIRED_ATTRS = {
    Kind.LITERAL: ("text",),
    Kind.CHAR_CLASS: ("ranges",),
    Kind.REFERENCE: ("name",),
    Kind.LEFT_RECURSIVE: ("left_assoc",),
    Kind.PRECEDENCE: ("level",),
    Kind.CLUSTER: ("groups",),
    Kind.CAPTURE: ("name", "record_text"),
    Kind.TOKEN: ("label",),
    Kind.MEMO: ("strategy",),
    Kind.TRACE: ("label",),
}


class GrammarError(Exception):
    """Raised for malformed expressions or grammars."""


class ResolutionError(GrammarError):
    pass


class TransformError(GrammarError):
    def __init__(self, node_id: int, cause: BaseException):
        super().__init__(f"transform failed at node {node_id}: {cause}")
        self.node_id = node_id
        self.cause = cause


@dataclass(frozen=True, eq=False)
class Expression:
    id: int
    kind: Kind
    children: tuple[int, ...] = ()
    attrs: Mapping[str, Any] = field(default_factory=dict)
    # Opaque per-expression data for custom extensions; fill before parsing.
    extensions: dict = field(default_factory=dict, repr=False)

    def __getitem__(self, key: str) -> Any:
        return self.attrs[key]

    def same_shape(self, other: Expression) -> bool:
        return (self.kind is other.kind and len(self.children) == len(other.children)
                and dict(self.attrs) == dict(other.attrs))


def build_expression(kind: Kind, children: Iterable[int] = (),
                     attributes: Mapping[str, Any] | None = None, *, id: int) -> Expression:
    """Validate arity and attributes for ``kind`` and return the node."""
    kind = Kind(kind)
    children = tuple(children)
    attrs = dict(attributes or {})
    n = len(children)
    if kind in TERMINALS:
        if n:
            raise GrammarError(f"{kind.value} takes no children, got {n}")
    elif kind in NARY:
        if kind is not Kind.SEQUENCE and n == 0:
            raise GrammarError(f"{kind.value} needs at least one child")
    elif n != 1:
        raise GrammarError(f"{kind.value} takes exactly one child, got {n}")
    for name in _REQUIRED_ATTRS.get(kind, ()):
        if name not in attrs:
            raise GrammarError(f"{kind.value} requires attribute {name!r}")
    if kind is Kind.PRECEDENCE and (not isinstance(attrs["level"], int) or attrs["level"] < 0):
        raise GrammarError(f"precedence level must be a non-negative integer, got {attrs['level']!r}")
    if kind is Kind.CHAR_CLASS:
        attrs["ranges"] = tuple((lo, hi) for lo, hi in attrs["ranges"])
        for lo, hi in attrs["ranges"]:
            if len(lo) != 1 or len(hi) != 1 or lo > hi:
                raise GrammarError(f"bad character range {lo!r}-{hi!r}")
    if kind is Kind.CLUSTER:
        groups = tuple((int(p), bool(left), int(size)) for p, left, size in attrs["groups"])
        if sum(size for _, _, size in groups) != n:
            raise GrammarError("cluster group sizes do not match its children")
        levels = [p for p, _, _ in groups]
        if any(size < 1 for _, _, size in groups):
            raise GrammarError("empty cluster group")
        if any(p < 1 for p in levels):
            raise GrammarError("cluster precedence levels must be >= 1")
        if any(a <= b for a, b in zip(levels, levels[1:])):
            raise GrammarError("cluster groups must have strictly decreasing precedence")
        attrs["groups"] = groups
    return Expression(id, kind, children, attrs)


@dataclass(frozen=True, eq=False)
class Grammar:
    nodes: Mapping[int, Expression]
    rules: Mapping[str, int]
    root: str
    whitespace: int | None = None
    # wrapper id -> description, for LeftRecursive nodes inserted by break_cycles
    auto_marked: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.root not in self.rules:
            raise GrammarError(f"root rule {self.root!r} is not defined")

    def __getitem__(self, node_id: int) -> Expression:
        return self.nodes[node_id]

    @property
    def root_id(self) -> int:
        return self.rules[self.root]

    def entry_points(self) -> list[int]:
        ids = list(self.rules.values())
        if self.whitespace is not None:
            ids.append(self.whitespace)
        return ids

    def reachable(self) -> list[int]:
        """Ids reachable from any rule or the whitespace expression, in DFS preorder."""
        seen: set[int] = set()
        order: list[int] = []
        stack = list(reversed(self.entry_points()))
        while stack:
            i = stack.pop()
            if i in seen:
                continue
            seen.add(i)
            order.append(i)
            stack.extend(reversed(self.nodes[i].children))
        return order

    def rule_names(self) -> dict[int, str]:
        """Root id -> first rule name (in definition order) rooted there."""
        names: dict[int, str] = {}
        for name, i in self.rules.items():
            names.setdefault(i, name)
        return names


class GrammarBuilder:
    """Programmatic construction, in the style of parser combinators.

    Every method returns the new node's id. Rules may reference each other
    by name before they are defined; call :meth:`grammar` then
    :func:`prepare` to get a parse-ready grammar.
    """

    def __init__(self, first_id: int = 0):
        self.nodes: dict[int, Expression] = {}
        self.rules: dict[str, int] = {}
        self._next = first_id

    def build(self, kind: Kind, children: Iterable[int] = (), **attrs) -> int:
        node = build_expression(kind, children, attrs, id=self._next)
        for c in node.children:
            if c not in self.nodes:
                raise GrammarError(f"unknown child id {c}")
        self.nodes[node.id] = node
        self._next += 1
        return node.id

    def _coerce(self, e: int | str) -> int:
        return self.lit(e) if isinstance(e, str) else e

    def lit(self, text: str) -> int:
        return self.build(Kind.LITERAL, text=text)

    def cls(self, *ranges: str | tuple[str, str]) -> int:
        """``cls("09", "az")`` or ``cls(("0", "9"))``; a 1-char string is a singleton."""
        norm = []
        for r in ranges:
            if isinstance(r, str):
                r = (r, r) if len(r) == 1 else (r[0], r[1])
            norm.append(r)
        return self.build(Kind.CHAR_CLASS, ranges=tuple(norm))

    def any(self) -> int:
        return self.build(Kind.ANY_CHAR)

    def seq(self, *items: int | str) -> int:
        return self.build(Kind.SEQUENCE, [self._coerce(e) for e in items])

    def choice(self, *items: int | str) -> int:
        return self.build(Kind.CHOICE, [self._coerce(e) for e in items])

    def star(self, e: int | str) -> int:
        return self.build(Kind.ZERO_OR_MORE, [self._coerce(e)])

    def plus(self, e: int | str) -> int:
        return self.build(Kind.ONE_OR_MORE, [self._coerce(e)])

    def opt(self, e: int | str) -> int:
        return self.build(Kind.OPTIONAL, [self._coerce(e)])

    def and_(self, e: int | str) -> int:
        return self.build(Kind.AND_PREDICATE, [self._coerce(e)])

    def not_(self, e: int | str) -> int:
        return self.build(Kind.NOT_PREDICATE, [self._coerce(e)])

    def ref(self, name: str) -> int:
        return self.build(Kind.REFERENCE, name=name)

    def left_recur(self, e: int, left_assoc: bool = False) -> int:
        return self.build(Kind.LEFT_RECURSIVE, [e], left_assoc=left_assoc)

    def precedence(self, level: int, e: int) -> int:
        return self.build(Kind.PRECEDENCE, [e], level=level)

    def escape(self, e: int) -> int:
        return self.build(Kind.ESCAPE_LEFT_BLOCK, [e])

    def cluster(self, groups: Iterable[tuple[int, bool, Iterable[int]]]) -> int:
        """``groups`` is ``[(precedence, left_assoc, [alternate ids]), ...]``, highest first."""
        layout, children = [], []
        for prec, left, ops in groups:
            ops = [self._coerce(o) for o in ops]
            layout.append((prec, left, len(ops)))
            children.extend(ops)
        return self.build(Kind.CLUSTER, children, groups=tuple(layout))

    def capture(self, e: int | str, name: str, record_text: bool = False) -> int:
        return self.build(Kind.CAPTURE, [self._coerce(e)], name=name, record_text=record_text)

    def token(self, e: int | str, label: str | None = None) -> int:
        return self.build(Kind.TOKEN, [self._coerce(e)], label=label)

    def memo(self, e: int, strategy: str = "default") -> int:
        return self.build(Kind.MEMO, [e], strategy=strategy)

    def trace(self, e: int, label: str) -> int:
        return self.build(Kind.TRACE, [e], label=label)

    def rule(self, name: str, e: int | str) -> int:
        if name in self.rules:
            raise GrammarError(f"duplicate rule {name!r}")
        self.rules[name] = self._coerce(e)
        return self.rules[name]

    def grammar(self, root: str | None = None, whitespace: str | int | None = None) -> Grammar:
        if not self.rules:
            raise GrammarError("grammar has no rules")
        root = root or next(iter(self.rules))
        if isinstance(whitespace, str):
            whitespace = self.ref(whitespace)
        return Grammar(dict(self.nodes), dict(self.rules), root, whitespace)


# -- reference resolution ---------------------------------------------------

def resolve_references(grammar: Grammar) -> Grammar:
    """Replace every Reference node by a direct edge to its rule's root."""
    nodes = grammar.nodes
    owner = _owning_rules(grammar)

    def target(i: int, chain: tuple[str, ...] = ()) -> int:
        node = nodes[i]
        if node.kind is not Kind.REFERENCE:
            return i
        name = node["name"]
        if name not in grammar.rules:
            where = f" in rule {owner[i]}" if i in owner else ""
            raise ResolutionError(f"unresolved reference {name}{where}")
        if name in chain:
            raise ResolutionError(f"rule {name} is defined only as an alias of itself")
        return target(grammar.rules[name], chain + (name,))

    new_nodes = {}
    for i, node in nodes.items():
        if node.kind is Kind.REFERENCE:
            continue
        kids = tuple(target(c) for c in node.children)
        new_nodes[i] = node if kids == node.children else replace(node, children=kids)
    rules = {name: target(i) for name, i in grammar.rules.items()}
    ws = None if grammar.whitespace is None else target(grammar.whitespace)
    return Grammar(new_nodes, rules, grammar.root, ws, dict(grammar.auto_marked))


def _owning_rules(grammar: Grammar) -> dict[int, str]:
    owner: dict[int, str] = {}
    for name, root in grammar.rules.items():
        stack = [root]
        while stack:
            i = stack.pop()
            if i in owner:
                continue
            owner[i] = name
            node = grammar.nodes[i]
            if node.kind is not Kind.REFERENCE:
                stack.extend(node.children)
    return owner


# -- nullability --------------------------------------------------------------

_ALWAYS_NULLABLE = frozenset({Kind.OPTIONAL, Kind.ZERO_OR_MORE, Kind.AND_PREDICATE, Kind.NOT_PREDICATE})
_NEVER_NULLABLE = frozenset({Kind.CHAR_CLASS, Kind.ANY_CHAR})


def _nullable_step(node: Expression, nullable: set[int]) -> bool:
    kind = node.kind
    if kind in _ALWAYS_NULLABLE:
        return True
    if kind in _NEVER_NULLABLE:
        return False
    if kind is Kind.LITERAL:
        return node["text"] == ""
    if kind is Kind.SEQUENCE:
        return all(c in nullable for c in node.children)
    if kind is Kind.REFERENCE:
        return False
    return any(c in nullable for c in node.children)


def compute_nullable(grammar: Grammar) -> frozenset[int]:
    """Least fixpoint of the nullability equations over all nodes."""
    nullable: set[int] = set()
    changed = True
    while changed:
        changed = False
        for i, node in grammar.nodes.items():
            if i not in nullable and _nullable_step(node, nullable):
                nullable.add(i)
                changed = True
    return frozenset(nullable)


# -- left-recursion cycles ------------------------------------------------------

def left_edges(grammar: Grammar, nullable: frozenset[int], *,
               skip_breakers: bool = False) -> dict[int, list[int]]:
    """Map each node to the children it may invoke at its own start position."""
    edges: dict[int, list[int]] = {}
    for i, node in grammar.nodes.items():
        if skip_breakers and node.kind in CYCLE_BREAKERS:
            edges[i] = []
        elif node.kind is Kind.SEQUENCE:
            out = []
            for c in node.children:
                out.append(c)
                if c not in nullable:
                    break
            edges[i] = out
        else:
            edges[i] = list(node.children)
    return edges


def _cycles_in(edges: dict[int, list[int]]) -> list[list[int]]:
    import networkx as nx

    g = nx.DiGraph()
    g.add_nodes_from(edges)
    g.add_edges_from((a, b) for a, outs in edges.items() for b in outs)
    cycles = []
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1 or any(i in edges[i] for i in comp):
            cycles.append(sorted(comp))
    cycles.sort()
    return cycles


def detect_left_cycles(grammar: Grammar, nullable: frozenset[int] | None = None, *,
                       skip_breakers: bool = False) -> list[list[int]]:
    """Strongly connected components of the left-edge relation that contain a cycle.

    With ``skip_breakers`` the out-edges of LeftRecursive and Cluster nodes
    are ignored, so the result lists only cycles that still need breaking.
    """
    if nullable is None:
        nullable = compute_nullable(grammar)
    return _cycles_in(left_edges(grammar, nullable, skip_breakers=skip_breakers))


def _pick_breaker(grammar: Grammar, cycle: list[int]) -> int:
    roots = [(name, i) for name, i in grammar.rules.items() if i in cycle]
    if roots:
        return min(roots)[1]
    return min(cycle)


def break_cycles(grammar: Grammar, cycles: list[list[int]] | None = None) -> Grammar:
    """Wrap one node of every unbroken left-recursive cycle in a LeftRecursive node.

    The wrapped node is the cycle's rule root with the smallest name, else
    its smallest id. All edges into the wrapped node are redirected to the
    wrapper. Repeats until no unbroken cycle remains.
    """
    if cycles is not None and not cycles:
        return grammar
    while True:
        live = detect_left_cycles(grammar, skip_breakers=True)
        if not live:
            return grammar
        grammar = _wrap(grammar, _pick_breaker(grammar, live[0]))


def _wrap(grammar: Grammar, target: int) -> Grammar:
    wrapper_id = max(grammar.nodes) + 1
    nodes = {}
    for i, node in grammar.nodes.items():
        if target in node.children:
            node = replace(node, children=tuple(wrapper_id if c == target else c for c in node.children))
        nodes[i] = node
    nodes[wrapper_id] = build_expression(Kind.LEFT_RECURSIVE, [target], {"left_assoc": False},
                                         id=wrapper_id)
    rules = {n: (wrapper_id if i == target else i) for n, i in grammar.rules.items()}
    ws = wrapper_id if grammar.whitespace == target else grammar.whitespace
    name = grammar.rule_names().get(target)
    marked = dict(grammar.auto_marked)
    marked[wrapper_id] = f"rule {name}" if name else f"node {target} ({grammar.nodes[target].kind.value})"
    return Grammar(nodes, rules, grammar.root, ws, marked)


def prepare(grammar: Grammar) -> Grammar:
    """Resolve references and break left-recursive cycles: the full load pipeline."""
    grammar = resolve_references(grammar)
    nullable = compute_nullable(grammar)
    return break_cycles(grammar, detect_left_cycles(grammar, nullable))


# -- visitor transforms --------------------------------------------------------

class GraphEditor:
    """Handed to transform visitors so they can add new nodes."""

    def __init__(self, grammar: Grammar):
        self.grammar = grammar
        self.added: dict[int, Expression] = {}
        self._next = max(grammar.nodes, default=-1) + 1

    def add(self, kind: Kind, children: Iterable[int] = (), **attrs) -> int:
        node = build_expression(kind, children, attrs, id=self._next)
        self.added[node.id] = node
        self._next += 1
        return node.id

    def node(self, i: int) -> Expression:
        return self.added.get(i) or self.grammar.nodes[i]


Visitor = Callable[[Expression, GraphEditor], "Expression | int | None"]


def transform(grammar: Grammar, visitor: Visitor) -> Grammar:
    """Apply ``visitor`` once to every reachable node, children first.

    The visitor sees the original node and returns ``None`` (keep it), a
    modified :class:`Expression` with the same id (replace in place), or the
    id of a node it added through the editor (redirect every edge into the
    original node there). Nodes added by the visitor keep their edges as
    written, so a wrapper may point at the node it replaces.
    """
    editor = GraphEditor(grammar)
    replacement: dict[int, int] = {}
    updated: dict[int, Expression] = {}
    for i in _postorder(grammar):
        node = grammar.nodes[i]
        try:
            out = visitor(node, editor)
        except TransformError:
            raise
        except Exception as exc:
            raise TransformError(i, exc) from exc
        if out is None:
            continue
        if isinstance(out, Expression):
            if out.id != i:
                raise TransformError(i, GrammarError("in-place rewrite must keep the node id"))
            updated[i] = out
        else:
            replacement[i] = out

    def r(i: int) -> int:
        return replacement.get(i, i)

    reachable = set(grammar.reachable())
    nodes = {}
    for i, node in grammar.nodes.items():
        node = updated.get(i, node)
        if i in reachable:
            kids = tuple(r(c) for c in node.children)
            if kids != node.children:
                node = replace(node, children=kids)
        nodes[i] = node
    nodes.update(editor.added)
    rules = {n: r(i) for n, i in grammar.rules.items()}
    ws = None if grammar.whitespace is None else r(grammar.whitespace)
    return Grammar(nodes, rules, grammar.root, ws, dict(grammar.auto_marked))


def _postorder(grammar: Grammar) -> Iterator[int]:
    seen: set[int] = set()
    for start in grammar.entry_points():
        if start in seen:
            continue
        seen.add(start)
        stack = [(start, iter(grammar.nodes[start].children))]
        while stack:
            i, it = stack[-1]
            for c in it:
                if c not in seen:
                    seen.add(c)
                    stack.append((c, iter(grammar.nodes[c].children)))
                    break
            else:
                stack.pop()
                yield i


def isomorphic(a: Grammar, b: Grammar, *, match_rule_names: bool = True) -> bool:
    """Graph isomorphism rooted at the rules: same kinds, attributes and edge structure."""
    if match_rule_names:
        if list(a.rules) != list(b.rules) or a.root != b.root:
            return False
        pairs = [(a.rules[n], b.rules[n]) for n in a.rules]
    else:
        if len(a.rules) != len(b.rules):
            return False
        pairs = list(zip(a.rules.values(), b.rules.values()))
    if (a.whitespace is None) != (b.whitespace is None):
        return False
    if a.whitespace is not None:
        pairs.append((a.whitespace, b.whitespace))
    fwd: dict[int, int] = {}
    back: dict[int, int] = {}
    while pairs:
        x, y = pairs.pop()
        if x in fwd or y in back:
            if fwd.get(x) != y or back.get(y) != x:
                return False
            continue
        nx_, ny = a.nodes[x], b.nodes[y]
        if not nx_.same_shape(ny):
            return False
        fwd[x], back[y] = y, x
        pairs.extend(zip(nx_.children, ny.children))
    return True
