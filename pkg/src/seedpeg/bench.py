"""Generated arithmetic grammars over L precedence levels and P operators per level.

Four styles, each accepting ``digit (op digit)*``:

* ``layered-right``: one rule per level, ``E1 = E2 '+' E1 | E2 '-' E1 | E2``
* ``idiomatic``: repetition instead of recursion, ``E1 = E2 ('+' E1 | '-' E1)*``
* ``layered-left``: ``E1 = E1 '+' E2 | E1 '-' E2 | E2``, cycles broken automatically
* ``cluster``: a single expression cluster with one group per level
"""

from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass, field

from .dsl import load_grammar
from .engine import parse_root
from .expr import Grammar, Kind, transform

STYLES = ("layered-right", "idiomatic", "layered-left", "cluster")
# Level-major: level 1 takes the first P characters, level 2 the next P, ...
OPERATORS = "+-*/%^&|<>~!@#$=?:;,.abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class BenchConfig:
    levels: int
    ops: int
    style: str = "cluster"
    memo: bool = False
    # cluster style only: mark every group @left_recur
    left_assoc: bool = True

    def __post_init__(self):
        if self.levels < 1 or self.ops < 1:
            raise ValueError("levels and ops must be >= 1")
        if self.style not in STYLES:
            raise ValueError(f"unknown style {self.style!r}; expected one of {', '.join(STYLES)}")
        if self.levels * self.ops > len(OPERATORS):
            raise ValueError(f"at most {len(OPERATORS)} operators available")

    def operators(self) -> list[list[str]]:
        """Operator characters per level, lowest precedence first."""
        p = self.ops
        return [list(OPERATORS[k * p:(k + 1) * p]) for k in range(self.levels)]


def _q(op: str) -> str:
    return "'" + op + "'"


def grammar_text(config: BenchConfig) -> str:
    ops = config.operators()
    n = config.levels
    if config.style == "cluster":
        arms = []
        for level in ops:
            for k, op in enumerate(level):
                arm = f"-> E {_q(op)} E"
                if k == 0:
                    arm += " @+" + (" @left_recur" if config.left_assoc else "")
                arms.append(arm)
        arms.append("-> [0-9] @+")
        return "E = expr\n  " + "\n  ".join(arms) + " ;\n"

    names = [f"E{k + 1}" for k in range(n)] + ["N"]
    lines = []
    for k, level in enumerate(ops):
        this, nxt = names[k], names[k + 1]
        if config.style == "layered-right":
            alts = [f"{nxt} {_q(op)} {this}" for op in level] + [nxt]
            body = " | ".join(alts)
        elif config.style == "layered-left":
            alts = [f"{this} {_q(op)} {nxt}" for op in level] + [nxt]
            body = " | ".join(alts)
        else:
            body = f"{nxt} (" + " | ".join(f"{_q(op)} {this}" for op in level) + ")*"
        lines.append(f"{this} = {body} ;")
    lines.append("N = [0-9] ;")
    return "\n".join(lines) + "\n"


def memoize_rules(grammar: Grammar, strategy: str = "default") -> Grammar:
    """Wrap every rule's root expression in a Memo node."""
    roots = set(grammar.rules.values())

    def visit(node, editor):
        if node.id in roots:
            return editor.add(Kind.MEMO, [node.id], strategy=strategy)
        return None
    return transform(grammar, visit)


def generate_grammar(config: BenchConfig) -> Grammar:
    grammar = load_grammar(grammar_text(config))
    return memoize_rules(grammar) if config.memo else grammar


def random_expression(config: BenchConfig, length: int, rng: random.Random | None = None) -> str:
    """A well-formed ``digit (op digit)*`` string of ``length`` characters (rounded up to odd)."""
    rng = rng or random.Random(0)
    ops = [op for level in config.operators() for op in level]
    digits = "0123456789"
    count = max(1, (length + 1) // 2)
    parts = [rng.choice(digits)]
    for _ in range(count - 1):
        parts.append(rng.choice(ops))
        parts.append(rng.choice(digits))
    return "".join(parts)


def digit_matchers(grammar: Grammar) -> list[int]:
    return [i for i, n in grammar.nodes.items()
            if n.kind is Kind.CHAR_CLASS and n["ranges"] == (("0", "9"),)]


@dataclass
class StatsReport:
    counts: dict[int, int]
    total: int
    digit_invocations: int
    peak_seeds: int
    wall_ms: float
    success: bool = True
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_state(cls, state, wall_ms: float, success: bool = True) -> "StatsReport":
        counts = state.invocation_counters
        digits = sum(counts.get(i, 0) for i in digit_matchers(state.grammar))
        return cls(counts, sum(counts.values()), digits, state.peak_seeds, wall_ms, success)

    def lines(self) -> list[str]:
        return [f"total_invocations\t{self.total}",
                f"digit_invocations\t{self.digit_invocations}",
                f"peak_seeds\t{self.peak_seeds}",
                f"wall_ms\t{self.wall_ms:.3f}"]


def measure(grammar: Grammar, text: str, reps: int = 1, full_match: bool = True) -> StatsReport:
    """Parse ``reps`` times; counts come from the last run, wall time is the median."""
    times = []
    for _ in range(max(1, reps)):
        t0 = time.perf_counter()
        outcome, state = parse_root(grammar, text, full_match=full_match)
        times.append((time.perf_counter() - t0) * 1000)
    return StatsReport.from_state(state, statistics.median(times), outcome.success)


TSV_HEADER = ("style", "L", "P", "digit_invocations", "total_invocations", "wall_ms", "input_len")


def bench_rows(config: BenchConfig, reps: int = 5, input_len: int = 1001,
               seed: int = 0) -> list[tuple]:
    """One single-digit row and (if ``input_len`` > 1) one long-input row."""
    grammar = generate_grammar(config)
    inputs = ["7"]
    if input_len > 1:
        inputs.append(random_expression(config, input_len, random.Random(seed)))
    rows = []
    for text in inputs:
        stats = measure(grammar, text, reps)
        if not stats.success:
            raise RuntimeError(f"{config.style} grammar rejected its own generated input")
        style = config.style + ("+memo" if config.memo else "")
        rows.append((style, config.levels, config.ops, stats.digit_invocations, stats.total,
                     round(stats.wall_ms, 3), len(text)))
    return rows


def format_tsv(rows: list[tuple]) -> str:
    lines = ["\t".join(TSV_HEADER)]
    lines.extend("\t".join(str(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"
