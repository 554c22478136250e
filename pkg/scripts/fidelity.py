#!/usr/bin/env python3
"""Size loss of the sparse constructions against their dense counterparts.

Sweeps clustered DFAs over alphabet size, cluster size and noise, and
reports (sparse - dense) / dense of the final transition count for orig and
cut. Use ``--rounds`` to see how the gap closes as r grows.
"""

import argparse
import itertools

from d2fa_compress import AlgoSpec, LshParams, compress, generate_clustered_dfa


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--alphabets", default="16,64,256")
    p.add_argument("--per-cluster", default="8,32,64")
    p.add_argument("--noise", default="0,0.05,0.2")
    p.add_argument("--families", default="orig,cut")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--rounds", default="512")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    families = args.families.split(",")
    rounds = [int(x) for x in args.rounds.split(",")]
    grid = itertools.product([int(x) for x in args.alphabets.split(",")],
                             [int(x) for x in args.per_cluster.split(",")],
                             [float(x) for x in args.noise.split(",")])
    print(f"{'m':>4} {'per':>4} {'noise':>5} {'family':<6} {'r':>5} {'dense':>9} {'sparse':>9} {'delta':>8}")
    for m, per, noise in grid:
        dfa = generate_clustered_dfa(args.n, m, max(1, args.n // per), noise, args.seed)
        for fam in families:
            dense = compress(dfa, AlgoSpec(fam))[1].total_after
            for r in rounds:
                spec = AlgoSpec(fam + "-sp", lsh=LshParams(k=args.k, r=r, seed=args.seed))
                sparse = compress(dfa, spec)[1].total_after
                print(f"{m:>4} {per:>4} {noise:>5g} {fam:<6} {r:>5} {dense:>9} {sparse:>9} "
                      f"{100 * (sparse - dense) / dense:+7.2f}%", flush=True)


if __name__ == "__main__":
    main()
