"""Command line: ``peg parse``, ``peg check`` and ``peg bench``."""

from __future__ import annotations

import argparse
import sys
import time

from .bench import STYLES, BenchConfig, StatsReport, bench_rows, format_tsv
from .dsl import _Dumper, read_grammar
from .engine import parse_root
from .expr import (CYCLE_BREAKERS, GrammarError, Kind, break_cycles, compute_nullable,
                   detect_left_cycles, prepare, resolve_references, transform)
from .memo import describe
from .tree import serialize_tree

EXIT_OK, EXIT_PARSE_FAILED, EXIT_GRAMMAR, EXIT_IO = 0, 1, 2, 3


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def trace_labels(grammar) -> dict[int, str]:
    names = grammar.rule_names()
    return {i: names.get(i) or describe(grammar, i) for i in grammar.nodes}


def traced(grammar):
    """Wrap every reachable node in a Trace node labelled by rule name or description."""
    labels = trace_labels(grammar)

    def visit(node, editor):
        return editor.add(Kind.TRACE, [node.id], label=labels[node.id])
    return transform(grammar, visit)


def cmd_parse(args) -> int:
    try:
        source = _read(args.grammar)
    except OSError as exc:
        print(f"cannot read grammar: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        grammar = prepare(read_grammar(source))
    except GrammarError as exc:
        print(f"grammar error: {exc}", file=sys.stderr)
        return EXIT_GRAMMAR
    try:
        text = _read(args.input)
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EXIT_IO

    extensions = {}
    if args.trace:
        grammar = traced(grammar)

        def sink(label, pos, end, depth):
            outcome = "fail" if end < 0 else str(end)
            print(f"{'  ' * depth}{label}\t{pos}\t{outcome}", file=sys.stderr)
        extensions["trace"] = sink

    t0 = time.perf_counter()
    outcome, state = parse_root(grammar, text, full_match=not args.no_full_match,
                                extensions=extensions)
    wall_ms = (time.perf_counter() - t0) * 1000
    if outcome.success:
        print(serialize_tree(outcome.nodes, args.tree_format))
        status = EXIT_OK
    else:
        print(state.error_handler.report(state))
        status = EXIT_PARSE_FAILED
    if args.stats:
        for line in StatsReport.from_state(state, wall_ms, outcome.success).lines():
            print(line)
    return status


def cmd_check(args) -> int:
    try:
        source = _read(args.grammar)
    except OSError as exc:
        print(f"cannot read grammar: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        grammar = resolve_references(read_grammar(source))
    except GrammarError as exc:
        print(f"grammar error: {exc}", file=sys.stderr)
        return EXIT_GRAMMAR

    nullable = compute_nullable(grammar)
    cycles = detect_left_cycles(grammar, nullable)
    broken = break_cycles(grammar, cycles)
    names = grammar.rule_names()
    dumper = _Dumper(grammar)

    def member(i: int) -> str:
        return f"rule {names[i]}" if i in names else f"node {i} ({grammar.nodes[i].kind.value})"

    if not cycles:
        print("no left recursion")
    else:
        print(f"left-recursive cycles: {len(cycles)}")
        for n, cycle in enumerate(cycles, 1):
            handled = [i for i in cycle if grammar.nodes[i].kind in CYCLE_BREAKERS]
            status = f"handled by {member(handled[0])}" if handled else "unmarked"
            shown = [member(i) for i in cycle if i in names] or [member(min(cycle))]
            print(f"  cycle {n}: {', '.join(shown)} [{status}]")
            for i in cycle:
                node = grammar.nodes[i]
                if node.kind is not Kind.SEQUENCE:
                    continue
                skipped = []
                for c in node.children:
                    if c in cycle:
                        break
                    skipped.append(c)
                if skipped and len(skipped) < len(node.children):
                    prefix = " ".join(dumper.render(c, 2) for c in skipped)
                    print(f"    hidden: recursion through nullable prefix {prefix}")
    if broken.auto_marked:
        print("auto-marked left-recursive: " + ", ".join(broken.auto_marked.values()))
    for name, i in grammar.rules.items():
        if i in nullable:
            print(f"warning: rule {name} can succeed without consuming input")
    return EXIT_OK


def cmd_bench(args) -> int:
    styles = STYLES if args.style == "all" else [args.style]
    rows = []
    for style in styles:
        config = BenchConfig(args.levels, args.ops, style, memo=args.memo)
        rows.extend(bench_rows(config, reps=args.reps, input_len=args.input_len))
    sys.stdout.write(format_tsv(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="peg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse an input file with a grammar file")
    p.add_argument("grammar")
    p.add_argument("input")
    p.add_argument("--tree-format", choices=("sexpr", "json"), default="sexpr")
    p.add_argument("--stats", action="store_true", help="append invocation statistics")
    p.add_argument("--trace", action="store_true", help="print every invocation to stderr")
    p.add_argument("--no-full-match", action="store_true", help="accept a prefix match")
    p.set_defaults(func=cmd_parse)

    c = sub.add_parser("check", help="report left recursion and nullable rules")
    c.add_argument("grammar")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("bench", help="invocation counts for generated arithmetic grammars")
    b.add_argument("--levels", "-L", type=int, default=2)
    b.add_argument("--ops", "-P", type=int, default=2)
    b.add_argument("--style", choices=STYLES + ("all",), default="all")
    b.add_argument("--memo", action="store_true", help="memoize every rule")
    b.add_argument("--input-len", type=int, default=1001)
    b.add_argument("--reps", type=int, default=5)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
