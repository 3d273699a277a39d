"""Wall time for generated arithmetic inputs of doubling size.

Each size is parsed ``--reps`` times with the chosen style; the best run is
reported with the ratio to the previous size. A ratio near 2 means linear time.
"""

from __future__ import annotations

import argparse
import gc
import random
import sys
import time

from seedpeg import parse_root
from seedpeg.bench import STYLES, BenchConfig, generate_grammar, random_expression


def best_time(grammar, text: str, reps: int) -> float:
    runs = []
    for _ in range(reps):
        gc.collect()
        t0 = time.perf_counter()
        outcome, _ = parse_root(grammar, text, full_match=True)
        runs.append(time.perf_counter() - t0)
        if not outcome.success:
            raise RuntimeError("generated input rejected")
    return min(runs)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--style", choices=STYLES, default="cluster")
    parser.add_argument("--levels", "-L", type=int, default=2)
    parser.add_argument("--ops", "-P", type=int, default=2)
    parser.add_argument("--memo", action="store_true")
    parser.add_argument("--start", type=int, default=62_500, help="smallest input size")
    parser.add_argument("--steps", type=int, default=5)
    parser.add_argument("--reps", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    config = BenchConfig(args.levels, args.ops, args.style, memo=args.memo)
    grammar = generate_grammar(config)
    text = random_expression(config, args.start * 2 ** (args.steps - 1), random.Random(args.seed))
    print("chars\tseconds\tratio")
    previous = None
    for k in range(args.steps):
        size = args.start * 2 ** k
        # odd prefix lengths end on a digit
        prefix = text[:size - 1 + size % 2]
        seconds = best_time(grammar, prefix, args.reps)
        ratio = f"{seconds / previous:.2f}" if previous else "-"
        print(f"{len(prefix)}\t{seconds:.3f}\t{ratio}")
        previous = seconds
    return 0


if __name__ == "__main__":
    sys.exit(main())
