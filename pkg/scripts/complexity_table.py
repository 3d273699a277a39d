"""Digit-matcher invocations on input "7" for every style over an L x P grid.

Prints a TSV with one row per (style, L, P) and the reference formulas
(P+1)^L and 2LP+2 alongside.
"""

from __future__ import annotations

import argparse
import itertools
import sys

from seedpeg import parse_root
from seedpeg.bench import STYLES, BenchConfig, digit_matchers, generate_grammar


def digit_count(config: BenchConfig) -> int:
    grammar = generate_grammar(config)
    _, state = parse_root(grammar, "7")
    return sum(state.counters[d] for d in digit_matchers(grammar))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-levels", type=int, default=4)
    parser.add_argument("--max-ops", type=int, default=4)
    args = parser.parse_args(argv)

    print("style\tL\tP\tdigits\t(P+1)^L\t2LP+2")
    variants = [(s, False) for s in STYLES] + [("layered-right", True)]
    for (style, memo), L, P in itertools.product(
            variants, range(1, args.max_levels + 1), range(1, args.max_ops + 1)):
        count = digit_count(BenchConfig(L, P, style, memo=memo))
        label = style + ("+memo" if memo else "")
        print(f"{label}\t{L}\t{P}\t{count}\t{(P + 1) ** L}\t{2 * L * P + 2}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
