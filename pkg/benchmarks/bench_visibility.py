"""Compare the Cython visibility kernel against the numpy fallback.

Generates random non-overlapping layouts at increasing sizes, times both
implementations on the same coordinate arrays (best of `--repeats` runs),
and verifies the edge lists agree on every instance.

Usage: python3 benchmarks/bench_visibility.py [--sizes 25,50,100,200,400] [--repeats 5]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from tabgraph import visibility
from synth import random_layout


def _coords(words):
    return tuple(
        np.ascontiguousarray([getattr(w, f) for w in words], dtype=np.float64)
        for f in ("x1", "y1", "x2", "y2")
    )


def _best_of(fn, args, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="25,50,100,200,400")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if visibility._visibility_fast is None:
        print("Cython kernel not built; only the pure backend is available.", file=sys.stderr)
        return 1

    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)
    print(f"{'n':>6}  {'pure (ms)':>10}  {'cython (ms)':>11}  {'speedup':>7}  edges")
    for n in sizes:
        coords = _coords(random_layout(rng, n, region=40.0 * np.sqrt(n)))
        t_pure, e_pure = _best_of(visibility._visibility_pure, coords, args.repeats)
        t_fast, e_fast = _best_of(
            visibility._visibility_fast.visibility_pairs, coords, args.repeats
        )
        assert e_pure == e_fast, f"backends disagree at n={n}"
        print(
            f"{n:>6}  {t_pure * 1e3:>10.3f}  {t_fast * 1e3:>11.3f}"
            f"  {t_pure / t_fast:>6.1f}x  {len(e_fast)}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
