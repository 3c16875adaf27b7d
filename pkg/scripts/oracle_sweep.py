"""Cross-check Huffman against exhaustive length search on random sources.

Prints the number of profiles checked and the largest discrepancy, in float
and exact rational arithmetic.
"""
import argparse
import time

import numpy as np

from qblockcode.kraft import adaptive_weights, constrained_weights, evaluate, optimal_lengths_bruteforce, optimal_lengths_huffman
from qblockcode.source_model import BlockConfig, random_source


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sources", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-l", type=int, default=3)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    checked, worst, exact_bad = 0, 0.0, 0
    for i in range(args.sources):
        model = random_source(rng, int(rng.integers(2, 4)), 2, "iid" if i % 2 else "markov")
        l = int(rng.integers(1, args.max_l + 1))
        cfg = BlockConfig(l, int(rng.integers(1, 3)))
        for w in (adaptive_weights(model, cfg), constrained_weights(model, cfg)):
            worst = max(worst, abs(evaluate(w, optimal_lengths_huffman(w)) - evaluate(w, optimal_lengths_bruteforce(w))))
            ex = w.exact()
            exact_bad += evaluate(ex, optimal_lengths_huffman(ex)) != evaluate(ex, optimal_lengths_bruteforce(ex))
            checked += 1
    print(f"profiles={checked} max_float_gap={worst:.3e} exact_mismatches={exact_bad} seconds={time.perf_counter() - t0:.1f}")


if __name__ == "__main__":
    main()
