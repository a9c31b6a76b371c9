"""Seeded comparison of every propagation route against the brute-force joint.

    python3 scripts/oracle_trials.py --trials 200 --seed 0
"""

import argparse
import time
from collections import defaultdict

import numpy as np

from encbel.errors import ResourceCapError
from encbel.generate import random_figure6_network, random_hub_network, random_loop_network, random_polytree
from encbel.network import figure6_shortcut, merge_loops, partition_optimize, propagate_merged, propagate_polytree
from encbel.oracle import oracle_marginals


def worst(got, ref, names):
    return max(got[v].max_abs_diff(ref[v]) for v in names)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    stats = defaultdict(list)  # route -> [(deviation, ms, oracle ms)]
    skipped = 0
    for _ in range(args.trials):
        cases = [
            ("polytree", random_polytree(rng), lambda n: propagate_polytree(n), None),
            ("merged 2a", random_loop_network(rng, "2a"), lambda n: propagate_merged(merge_loops(n)), None),
            ("merged 2c", random_loop_network(rng, "2c"), lambda n: propagate_merged(merge_loops(n)), None),
            ("partition", random_hub_network(rng), lambda n: {"A": partition_optimize(n, "A")[0]}, ["A"]),
            ("mixture", random_figure6_network(rng), lambda n: {"A": figure6_shortcut(n, "X", "Y", "A")}, ["A"]),
        ]
        for name, net, run, names in cases:
            try:
                t0 = time.perf_counter()
                ref = oracle_marginals(net).marginals
                t1 = time.perf_counter()
                got = run(net)
                t2 = time.perf_counter()
            except ResourceCapError:
                skipped += 1
                continue
            stats[name].append((worst(got, ref, names or list(net.variables)), (t2 - t1) * 1e3, (t1 - t0) * 1e3))

    print(f"{'route':<10} {'runs':>5} {'max dev':>10} {'median ms':>10} {'oracle ms':>10}")
    for name, rows in stats.items():
        arr = np.array(rows)
        print(f"{name:<10} {len(rows):5d} {arr[:, 0].max():10.2e} "
              f"{np.median(arr[:, 1]):10.3f} {np.median(arr[:, 2]):10.3f}")
    if skipped:
        print(f"{skipped} cases skipped at the resource cap")


if __name__ == "__main__":
    main()
