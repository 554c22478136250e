#!/usr/bin/env python3
"""Time dense and sparse compressors over a ladder of clustered DFAs.

Writes one CSV row per run (same columns as ``d2fa bench``) and prints the
log-log slope of median time against n for every algorithm, plus the
sparse/dense time ratio at the largest rung.
"""

import argparse
import csv
import sys

import numpy as np

from d2fa_compress import AlgoSpec, LshParams, generate_clustered_dfa
from d2fa_compress.cli import CSV_HEADER, bench_row, warm_up


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="1024,2048,4096,8192,16384")
    p.add_argument("--algos", default="orig,adfa,orig-sp,adfa-sp,cut-sp")
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--alphabet", type=int, default=256)
    p.add_argument("--per-cluster", type=int, default=32)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--r", type=int, default=512)
    p.add_argument("--csv", default="scaling.csv")
    args = p.parse_args(argv)

    sizes = [int(x) for x in args.sizes.split(",")]
    algos = args.algos.split(",")
    seeds = [int(x) for x in args.seeds.split(",")]
    warm_up(algos)

    times = {a: {n: [] for n in sizes} for a in algos}
    with open(args.csv, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_HEADER, restval="")
        w.writeheader()
        for seed in seeds:
            for n in sizes:
                dfa = generate_clustered_dfa(n, args.alphabet, max(1, n // args.per_cluster), args.noise, seed)
                for algo in algos:
                    spec = AlgoSpec(algo, lsh=LshParams(k=args.k, r=args.r, seed=seed))
                    row, err = bench_row(f"clustered-n{n}", dfa, spec, dense_cap=10**9)
                    w.writerow(row)
                    fh.flush()
                    if err:
                        print(f"n={n} {algo} seed={seed}: {err}", file=sys.stderr)
                        continue
                    times[algo][n].append(float(row["t_total_ms"]))
                    print(f"n={n:<6} {algo:<10} seed={seed} {float(row['t_total_ms']):10.1f} ms", flush=True)

    print("\nalgo        slope   median ms per size")
    for algo in algos:
        med = [float(np.median(times[algo][n])) for n in sizes if times[algo][n]]
        if len(med) < 2:
            continue
        slope = np.polyfit(np.log(sizes[:len(med)]), np.log(med), 1)[0]
        print(f"{algo:<10} {slope:6.2f}   " + " ".join(f"{t:.0f}" for t in med))
    top = sizes[-1]
    for algo in algos:
        dense = algo.removesuffix("-sp")
        if algo.endswith("-sp") and dense in times and times[dense][top] and times[algo][top]:
            ratio = np.median(times[algo][top]) / np.median(times[dense][top])
            print(f"n={top}: {algo}/{dense} time ratio {ratio:.3f}")


if __name__ == "__main__":
    main()
