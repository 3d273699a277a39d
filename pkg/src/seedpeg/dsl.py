"""Grammar files: loading (parsed with this library's own engine) and dumping.

Syntax::

    grammar   := directive* rule+
    directive := "%start" NAME | "%whitespace" NAME
    rule      := NAME "=" (clusterBody | choice) ";"
    clusterBody := "expr" ("->" sequence annotation*)+
    annotation  := "@+" | "@left_recur"
    choice    := sequence ("|" sequence)*
    sequence  := prefixed+
    prefixed  := ("&" | "!")? suffixed
    suffixed  := primary ("*" | "+" | "?")? capture?
    capture   := ":" NAME "$"?
    primary   := NAME | STRING | CHARCLASS | "." | "(" choice ")"
               | "%token" "(" choice ")" | "%memo" "(" choice ")"
               | "%left_recur" "(" choice ")" | "%left_assoc" "(" choice ")"
               | "%escape" "(" choice ")" | "%precedence" "(" INT "," choice ")"

Comments run from ``#`` to the end of the line. Without a ``%whitespace``
directive, a rule named ``WS`` is used as the whitespace expression.
"""

from __future__ import annotations

from functools import lru_cache

from .cluster import ClusterError, cluster_from_alternates, cluster_groups
from .engine import parse_root
from .expr import Grammar, GrammarBuilder, GrammarError, Kind, prepare
from .tree import SyntaxNode


class DSLError(GrammarError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


_STRING_ESCAPES = {"'": "'", "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}
_CLASS_ESCAPES = {"]": "]", "[": "[", "\\": "\\", "-": "-", "n": "\n", "t": "\t", "r": "\r"}
_SPECIAL_FORMS = ("token", "memo", "left_recur", "left_assoc", "escape")


@lru_cache(maxsize=1)
def _meta_grammar() -> Grammar:
    b = GrammarBuilder()
    name_start = b.cls(("a", "z"), ("A", "Z"), "_")
    name_char = b.cls(("a", "z"), ("A", "Z"), ("0", "9"), "_")

    def t(s: str) -> int:
        return b.token(b.lit(s))

    def tag(s: str, name: str) -> int:
        return b.capture(t(s), name)

    def ref(name):
        return b.ref(name)

    b.rule("Grammar", b.seq(ref("WS"), b.star(ref("Directive")), b.plus(ref("Rule")), b.not_(b.any())))
    b.rule("WS", b.star(b.choice(b.plus(b.cls(" ", "\t", "\r", "\n")),
                                 b.seq("#", b.star(b.seq(b.not_("\n"), b.any()))))))
    b.rule("Name", b.capture(b.token(b.seq(name_start, b.star(name_char))), "name", True))
    b.rule("Directive", b.choice(b.capture(b.seq(t("%start"), ref("Name")), "start"),
                                 b.capture(b.seq(t("%whitespace"), ref("Name")), "whitespace")))
    b.rule("Rule", b.capture(b.seq(ref("Name"), t("="), b.choice(ref("Cluster"), ref("Choice")), t(";")),
                             "rule"))
    b.rule("Cluster", b.capture(b.seq(b.token(b.seq("expr", b.not_(name_char))), b.plus(ref("Arm"))),
                                "cluster"))
    b.rule("Arm", b.capture(b.seq(t("->"), ref("Sequence"),
                                  b.star(b.choice(tag("@+", "inc"), tag("@left_recur", "left")))), "arm"))
    b.rule("Choice", b.capture(b.seq(ref("Sequence"), b.star(b.seq(t("|"), ref("Sequence")))), "choice"))
    b.rule("Sequence", b.capture(b.plus(ref("Prefixed")), "seq"))
    b.rule("Prefixed", b.capture(b.seq(b.opt(b.choice(tag("&", "and"), tag("!", "not"))), ref("Suffixed")),
                                 "prefixed"))
    b.rule("Suffixed", b.capture(b.seq(
        ref("Primary"),
        b.opt(b.choice(tag("*", "star"), tag("+", "plus"), tag("?", "opt"))),
        b.opt(b.capture(b.seq(t(":"), ref("Name"), b.opt(tag("$", "record"))), "capture"))), "suffixed"))
    forms = [b.capture(b.seq(t("%" + f), t("("), ref("Choice"), t(")")), f) for f in _SPECIAL_FORMS]
    forms.append(b.capture(b.seq(t("%precedence"), t("("), ref("Int"), t(","), ref("Choice"), t(")")),
                           "precedence"))
    b.rule("Primary", b.choice(*forms,
                               b.seq(t("("), ref("Choice"), t(")")),
                               ref("String"), ref("Class"), tag(".", "any"), ref("Name")))
    b.rule("Int", b.capture(b.token(b.plus(b.cls(("0", "9")))), "int", True))
    escaped = b.seq("\\", b.any())
    b.rule("String", b.capture(b.token(b.seq(
        "'", b.star(b.choice(escaped, b.seq(b.not_(b.cls("'", "\\")), b.any()))), "'")), "string", True))
    b.rule("Class", b.capture(b.token(b.seq(
        "[", b.star(b.choice(escaped, b.seq(b.not_("]"), b.any()))), "]")), "class", True))
    return prepare(b.grammar("Grammar", whitespace="WS"))


def _unescape(body: str, table: dict[str, str], what: str) -> list[tuple[str, bool]]:
    """Decode escapes; returns (char, was_escaped) pairs."""
    out, k = [], 0
    while k < len(body):
        c = body[k]
        if c == "\\":
            nxt = body[k + 1]
            if nxt not in table:
                raise DSLError(f"unknown escape \\{nxt} in {what}")
            out.append((table[nxt], True))
            k += 2
        else:
            out.append((c, False))
            k += 1
    return out


def _class_ranges(body: str) -> list[tuple[str, str]]:
    items = _unescape(body, _CLASS_ESCAPES, "character class")
    ranges, k = [], 0
    while k < len(items):
        c = items[k][0]
        if k + 2 < len(items) and items[k + 1] == ("-", False):
            hi = items[k + 2][0]
            if hi < c:
                raise DSLError(f"reversed range {c}-{hi}")
            ranges.append((c, hi))
            k += 3
        else:
            ranges.append((c, c))
            k += 1
    return ranges


class _Loader:
    def __init__(self, text: str):
        self.text = text
        self.b = GrammarBuilder()

    def error(self, node: SyntaxNode, message: str) -> DSLError:
        from .memo import line_column
        return DSLError(message, *line_column(self.text, node.start))

    def expr(self, node: SyntaxNode) -> int:
        b = self.b
        name = node.name
        kids = node.children
        if name == "choice":
            alts = [self.expr(c) for c in kids]
            return alts[0] if len(alts) == 1 else b.choice(*alts)
        if name == "seq":
            items = [self.expr(c) for c in kids]
            return items[0] if len(items) == 1 else b.seq(*items)
        if name == "prefixed":
            inner = self.expr(kids[-1])
            if len(kids) == 2:
                return b.and_(inner) if kids[0].name == "and" else b.not_(inner)
            return inner
        if name == "suffixed":
            e = self.expr(kids[0])
            for extra in kids[1:]:
                if extra.name == "star":
                    e = b.star(e)
                elif extra.name == "plus":
                    e = b.plus(e)
                elif extra.name == "opt":
                    e = b.opt(e)
                elif extra.name == "capture":
                    e = b.capture(e, extra.children[0].text, len(extra.children) > 1)
            return e
        if name == "name":
            return b.ref(node.text)
        if name == "string":
            chars = _unescape(node.text[1:-1], _STRING_ESCAPES, "string")
            return b.lit("".join(c for c, _ in chars))
        if name == "class":
            try:
                return b.cls(*_class_ranges(node.text[1:-1]))
            except DSLError as exc:
                raise self.error(node, str(exc)) from None
        if name == "any":
            return b.any()
        if name == "token":
            return b.token(self.expr(kids[0]))
        if name == "memo":
            return b.memo(self.expr(kids[0]))
        if name == "left_recur":
            return b.left_recur(self.expr(kids[0]), left_assoc=False)
        if name == "left_assoc":
            return b.left_recur(self.expr(kids[0]), left_assoc=True)
        if name == "escape":
            return b.escape(self.expr(kids[0]))
        if name == "precedence":
            return b.precedence(int(kids[0].text), self.expr(kids[1]))
        raise self.error(node, f"unexpected {name} node")

    def cluster(self, node: SyntaxNode) -> int:
        alternates = []
        for arm in node.children:
            seq, annotations = arm.children[0], arm.children[1:]
            increments = sum(1 for a in annotations if a.name == "inc")
            lefts = sum(1 for a in annotations if a.name == "left")
            if lefts > 1:
                raise self.error(arm, "@left_recur given twice on one alternate")
            alternates.append((self.expr(seq), increments, lefts == 1))
        try:
            return cluster_from_alternates(self.b, alternates)
        except ClusterError as exc:
            raise self.error(node, str(exc)) from None

    def load(self, tree: SyntaxNode) -> Grammar:
        start = whitespace = None
        for node in tree.children:
            if node.name == "start":
                start = node.children[0].text
            elif node.name == "whitespace":
                whitespace = node.children[0].text
            else:
                rule_name, body = node.children
                if rule_name.text in self.b.rules:
                    raise self.error(rule_name, f"duplicate rule {rule_name.text}")
                e = self.cluster(body) if body.name == "cluster" else self.expr(body)
                self.b.rule(rule_name.text, e)
        if whitespace is None and "WS" in self.b.rules:
            whitespace = "WS"
        if start is not None and start not in self.b.rules:
            raise DSLError(f"%start names unknown rule {start}")
        return self.b.grammar(start, whitespace)


def read_grammar(text: str) -> Grammar:
    """Parse grammar text into an unprepared grammar that still holds Reference nodes."""
    outcome, state = parse_root(_meta_grammar(), text, full_match=True)
    if not outcome.success:
        report = state.error_handler.report(state)
        expected = ", ".join(sorted(report.expectations))
        raise DSLError(f"syntax error, expected one of {{{expected}}}", report.line, report.column)
    tree = SyntaxNode("grammar", 0, len(text), None, outcome.nodes)
    return _Loader(text).load(tree)


def load_grammar(text: str) -> Grammar:
    """Parse grammar text and return a parse-ready (resolved, cycle-broken) grammar."""
    return prepare(read_grammar(text))


# -- dumping --------------------------------------------------------------------------

CHOICE, SEQ, PREFIX, CAPTURED, SUFFIXED, PRIMARY = range(6)


def _quote(s: str) -> str:
    out = s.replace("\\", "\\\\").replace("'", "\\'")
    return "'" + out.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r") + "'"


def _class_char(c: str) -> str:
    return {"]": "\\]", "[": "\\[", "\\": "\\\\", "-": "\\-",
            "\n": "\\n", "\t": "\\t", "\r": "\\r"}.get(c, c)


class _Dumper:
    def __init__(self, grammar: Grammar):
        self.g = grammar
        self.names = dict(grammar.rule_names())
        indegree: dict[int, int] = {}
        for i in grammar.reachable():
            for c in grammar.nodes[i].children:
                indegree[c] = indegree.get(c, 0) + 1
        taken = set(grammar.rules)
        self.extra: list[int] = []
        for i in grammar.reachable():
            node = grammar.nodes[i]
            if i in self.names:
                continue
            if indegree.get(i, 0) > 1 or node.kind is Kind.CLUSTER or i == grammar.whitespace:
                name = f"_n{i}"
                while name in taken:
                    name = "_" + name
                taken.add(name)
                self.names[i] = name
                self.extra.append(i)

    def render(self, i: int, need: int, top: bool = False) -> str:
        text, level = self._render(i, top)
        return text if level >= need else f"({text})"

    def _render(self, i: int, top: bool) -> tuple[str, int]:
        if not top and i in self.names:
            return self.names[i], PRIMARY
        node = self.g.nodes[i]
        kind = node.kind
        kids = node.children
        if kind is Kind.LITERAL:
            return _quote(node["text"]), PRIMARY
        if kind is Kind.CHAR_CLASS:
            parts = [_class_char(lo) if lo == hi else f"{_class_char(lo)}-{_class_char(hi)}"
                     for lo, hi in node["ranges"]]
            return "[" + "".join(parts) + "]", PRIMARY
        if kind is Kind.ANY_CHAR:
            return ".", PRIMARY
        if kind is Kind.CHOICE:
            return " | ".join(self.render(c, SEQ) for c in kids), CHOICE
        if kind is Kind.SEQUENCE:
            if not kids:
                return "''", PRIMARY
            return " ".join(self.render(c, PREFIX) for c in kids), SEQ
        if kind in (Kind.AND_PREDICATE, Kind.NOT_PREDICATE):
            sigil = "&" if kind is Kind.AND_PREDICATE else "!"
            return sigil + self.render(kids[0], CAPTURED), PREFIX
        if kind in (Kind.ZERO_OR_MORE, Kind.ONE_OR_MORE, Kind.OPTIONAL):
            sigil = {Kind.ZERO_OR_MORE: "*", Kind.ONE_OR_MORE: "+", Kind.OPTIONAL: "?"}[kind]
            return self.render(kids[0], PRIMARY) + sigil, SUFFIXED
        if kind is Kind.CAPTURE:
            mark = "$" if node["record_text"] else ""
            return f"{self.render(kids[0], SUFFIXED)}:{node['name']}{mark}", CAPTURED
        if kind is Kind.LEFT_RECURSIVE:
            form = "left_assoc" if node["left_assoc"] else "left_recur"
            return f"%{form}({self.render(kids[0], CHOICE)})", PRIMARY
        if kind in (Kind.TOKEN, Kind.MEMO, Kind.ESCAPE_LEFT_BLOCK):
            form = {Kind.TOKEN: "token", Kind.MEMO: "memo", Kind.ESCAPE_LEFT_BLOCK: "escape"}[kind]
            return f"%{form}({self.render(kids[0], CHOICE)})", PRIMARY
        if kind is Kind.PRECEDENCE:
            return f"%precedence({node['level']}, {self.render(kids[0], CHOICE)})", PRIMARY
        if kind is Kind.TRACE:
            return self._render(kids[0], False)
        if kind is Kind.CLUSTER:
            arms, prev = [], 0
            for group in sorted(cluster_groups(node), key=lambda g: g.precedence):
                for n, op in enumerate(group.ops):
                    arm = "-> " + self.render(op, SEQ)
                    if n == 0:
                        arm += " @+" * (group.precedence - prev)
                        if group.left_assoc:
                            arm += " @left_recur"
                    arms.append(arm)
                prev = group.precedence
            return "expr " + " ".join(arms), CHOICE
        raise GrammarError(f"cannot dump {kind.value} nodes")

    def dump(self) -> str:
        g = self.g
        lines = []
        first = next(iter(g.rules))
        if g.root != first:
            lines.append(f"%start {g.root}")
        if g.whitespace is not None:
            lines.append(f"%whitespace {self.names[g.whitespace]}")
        if lines:
            lines.append("")
        primary = self.g.rule_names()
        for name, i in g.rules.items():
            if primary[i] != name:
                lines.append(f"{name} = {primary[i]} ;")
            else:
                lines.append(f"{name} = {self.render(i, CHOICE, top=True)} ;")
        for i in self.extra:
            lines.append(f"{self.names[i]} = {self.render(i, CHOICE, top=True)} ;")
        return "\n".join(lines) + "\n"


def dump_grammar(grammar: Grammar) -> str:
    """Render a grammar as text that :func:`load_grammar` maps back to an isomorphic graph."""
    return _Dumper(grammar).dump()
