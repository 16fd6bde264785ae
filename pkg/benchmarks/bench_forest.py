"""Compare the compiled and pure-Python tree kernels.

    python3 benchmarks/bench_forest.py --trees 100 --n 200 --alphabet 12
"""

import argparse
import time

from ibts.classify import BACKENDS, ForestParams, fit_forest
from ibts.features import build_combined_matrix
from ibts.synth import SynthSpec, generate, parse_rule


def best_of(repeats, fn):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--trees", type=int, default=100)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--alphabet", type=int, default=12)
    ap.add_argument("--intervals", type=int, default=10)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    spec = SynthSpec(
        parse_rule("relation:A:B:o"),
        sequence_count=args.n,
        alphabet_size=args.alphabet,
        intervals_per_sequence=(args.intervals, args.intervals),
        seed=1,
    )
    d = generate(spec)
    t_extract = best_of(args.repeats, lambda: build_combined_matrix(d))
    m = build_combined_matrix(d)
    print(f"dataset: {len(d)} sequences, {m.shape[1]} features; extraction {t_extract * 1e3:.1f} ms")

    params = ForestParams(tree_count=args.trees, seed=3)
    results = {}
    for name in sorted(BACKENDS):
        fit = lambda: fit_forest(m, params, workers=args.workers, backend=name)  # noqa: E731
        results[name] = best_of(args.repeats, fit)
        per_tree = results[name] / args.trees * 1e3
        print(f"{name:>8}: {results[name]:.3f} s for {args.trees} trees ({per_tree:.2f} ms/tree)")
    if len(results) == 2:
        print(f"speedup: {results['python'] / results['compiled']:.1f}x")
        a = fit_forest(m, params, backend="compiled")
        b = fit_forest(m, params, backend="python")
        print("identical trees:", all(x.same_as(y) for x, y in zip(a.trees, b.trees)))


if __name__ == "__main__":
    main()
