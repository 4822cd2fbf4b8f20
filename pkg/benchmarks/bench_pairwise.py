"""Compare the compiled and numpy pair-scoring kernels on a synthetic corpus.

    python benchmarks/bench_pairwise.py --accounts 48 --posts-per-account 200
"""

import argparse
import time

from newsflow._backend import KERNELS
from newsflow.profile import ProfileIndex, pairwise_similarities
from newsflow.synth import SynthConfig, generate_corpus


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--accounts", type=int, default=48)
    ap.add_argument("--posts-per-account", type=int, default=200)
    ap.add_argument("--floor", type=float, default=0.5)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    corpus, _ = generate_corpus(SynthConfig(args.accounts, args.posts_per_account, seed=1))
    t0 = time.perf_counter()
    index = ProfileIndex(corpus.posts)
    print(f"posts={len(index)} pairs={len(index) * (len(index) - 1) // 2} "
          f"profiling={time.perf_counter() - t0:.2f}s")

    results = {}
    for name, kernel in KERNELS.items():
        best = float("inf")
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            edges = pairwise_similarities(index, args.floor, workers=args.workers, kernel=kernel)
            best = min(best, time.perf_counter() - t0)
        results[name] = (best, edges)
        print(f"{name:>9}: {best:.3f}s  edges={len(edges)}")

    if len(results) == 2:
        (tc, ec), (tp, ep) = results["compiled"], results["python"]
        print(f"speedup: {tp / tc:.1f}x  identical={ec == ep}")
    else:
        print("compiled kernel not built; only the fallback was timed")


if __name__ == "__main__":
    main()
