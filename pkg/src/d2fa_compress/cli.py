"""Command-line entry point: compile, compress, match, verify, bench."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .automata import Dfa, generate_clustered_dfa, read_dfa, write_dfa
from .d2fa import (D2faError, Scanner, UnresolvableTransition, first_mismatch, read_d2fa,
                   resolve, write_d2fa)
from .graphs import DENSE_STATE_CAP, LshParams
from .pipelines import ALGORITHMS, AlgoSpec, compress
from .regex import (DfaBlowupError, RegexSyntaxError, RuleSetConfig, compile_regex_set,
                    generate_rules, read_rules)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTEGRITY = 2

CSV_HEADER = ["dataset", "n", "algo", "L", "k", "r", "seed", "labeled_after", "default_count",
              "ratio", "longest_delay", "t_graph_ms", "t_forest_ms", "t_build_ms", "t_total_ms"]

CHUNK = 1 << 20


class _Parser(argparse.ArgumentParser):
    # usage errors share exit code 1 with bad input; 2 is reserved for integrity failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _fail(msg: str, code: int = EXIT_INPUT) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


# --------------------------------------------------------------------------
# compile


def cmd_compile(args) -> int:
    try:
        numbered = read_rules(args.rules)
    except OSError as e:
        return _fail(str(e))
    patterns = [p for _, p in numbered]
    t0 = time.perf_counter()
    try:
        dfa = compile_regex_set(patterns, args.alphabet, symbols=args.symbols,
                                minimize=args.minimize, unanchored=args.unanchored,
                                state_cap=args.state_cap)
    except RegexSyntaxError as e:
        lineno = numbered[e.rule_index][0]
        return _fail(f"{args.rules}:{lineno}: offset {e.offset}: {e.message}")
    except (DfaBlowupError, ValueError) as e:
        return _fail(str(e))
    elapsed = (time.perf_counter() - t0) * 1000.0
    write_dfa(dfa, args.out)
    print(f"states {dfa.state_count}")
    print(f"rules {len(patterns)}")
    print(f"build_ms {elapsed:.1f}")
    return EXIT_OK


# --------------------------------------------------------------------------
# compress


def _spec_from(args) -> AlgoSpec:
    return AlgoSpec(args.algo, L=args.L, lsh=LshParams(k=args.k, r=args.r, seed=args.seed))


def cmd_compress(args) -> int:
    try:
        dfa = read_dfa(args.dfa)
        spec = _spec_from(args)
        warm_up([spec.id])
        d2fa, report = compress(dfa, spec, dense_cap=args.dense_cap)
    except (OSError, ValueError, RuntimeError) as e:
        return _fail(str(e))
    verified = None
    if not args.no_verify:
        bad = first_mismatch(dfa, d2fa)
        verified = bad is None
        if not verified:
            return _fail(f"compressed automaton disagrees at state {bad[0]}, character {bad[1]}",
                         EXIT_INTEGRITY)
    write_d2fa(d2fa, args.out)
    record = asdict(report)
    record["verified"] = verified
    if args.stats:
        with open(args.stats, "w") as fh:
            json.dump(record, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"{report.algorithm}: n={report.n} total_after={report.total_after} "
          f"ratio={report.compression_ratio:.4f} longest_delay={report.longest_delay} "
          f"t_total_ms={report.elapsed_ms['total']:.1f}")
    return EXIT_OK


# --------------------------------------------------------------------------
# match


def _symbol_lookup(alphabet_size: int, symbols: str | None) -> np.ndarray | None:
    """byte -> symbol id table (-1 for bytes outside the alphabet)."""
    if symbols is None:
        return None
    codes = symbols.encode("latin-1")
    if len(codes) != alphabet_size or len(set(codes)) != alphabet_size:
        raise ValueError(f"--symbols must list {alphabet_size} distinct characters")
    lut = np.full(256, -1, dtype=np.int64)
    lut[list(codes)] = np.arange(alphabet_size)
    return lut


def cmd_match(args) -> int:
    try:
        d2fa = read_d2fa(args.d2fa)
        lut = _symbol_lookup(d2fa.alphabet_size, args.symbols)
    except (OSError, ValueError) as e:
        return _fail(str(e))
    scanner = Scanner(d2fa)
    try:
        with open(args.input, "rb") as fh:
            while chunk := fh.read(CHUNK):
                data = np.frombuffer(chunk, dtype=np.uint8).astype(np.int64)
                if lut is not None:
                    data = lut[data]
                if data.size and (data.min() < 0 or data.max() >= d2fa.alphabet_size):
                    bad = int(np.flatnonzero((data < 0) | (data >= d2fa.alphabet_size))[0])
                    return _fail(f"input byte at offset {scanner.consumed + bad} is outside "
                                 f"the {d2fa.alphabet_size}-symbol alphabet (see --symbols)")
                for pos in scanner.feed(data).tolist():
                    print(f"accept {pos}")
    except UnresolvableTransition as e:
        return _fail(f"{e} at input offset {scanner.consumed}", EXIT_INTEGRITY)
    except OSError as e:
        return _fail(str(e))
    consumed = scanner.consumed
    per_byte = scanner.delay / consumed if consumed else 0.0
    print(f"bytes {consumed}")
    print(f"matching_delay {scanner.delay}")
    print(f"delay_per_byte {per_byte:.4f}")
    if args.report:
        print(json.dumps({"bytes": consumed, "end_state": scanner.state,
                          "accepted": scanner.state in d2fa.accepting,
                          "matching_delay": scanner.delay, "delay_per_byte": per_byte,
                          "max_step_delay": scanner.worst_step}, sort_keys=True))
    return EXIT_OK


# --------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    try:
        dfa = read_dfa(args.dfa)
        d2fa = read_d2fa(args.d2fa)
        bad = first_mismatch(dfa, d2fa)
    except D2faError as e:
        return _fail(str(e))
    except (OSError, ValueError) as e:
        return _fail(str(e))
    if bad is None:
        print(f"equivalent: {dfa.state_count} states x {dfa.alphabet_size} symbols")
        return EXIT_OK
    u, c = bad
    try:
        got = str(resolve(d2fa, u, c)[0])
    except UnresolvableTransition as e:
        got = str(e)
    print(f"mismatch at state {u}, character {c}: expected {dfa.table[u, c]}, got {got}")
    return EXIT_INTEGRITY


# --------------------------------------------------------------------------
# bench


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split("/")]


def parse_synthetic(spec: str):
    """``clustered:n=1024/2048,m=256,per_cluster=32,noise=0.05`` or
    ``rules:count=8/16/32,len=34,m=256,wildcard=0.5``. Slash-separated values
    form the ladder; ``clusters=C`` fixes the cluster count instead of
    ``per_cluster``. Returns (kind, ladder values, options)."""
    kind, _, rest = spec.partition(":")
    opts = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise ValueError(f"bad synthetic option {item!r}")
        opts[key.strip()] = value.strip()
    if kind == "clustered":
        ladder = _ints(opts.pop("n", "1024/2048/4096/8192"))
        known = {"m", "per_cluster", "clusters", "noise", "forward"}
    elif kind == "rules":
        ladder = _ints(opts.pop("count", "8/16/32"))
        known = {"m", "len", "wildcard", "restrict", "minimize"}
    else:
        raise ValueError(f"unknown synthetic kind {kind!r} (clustered or rules)")
    unknown = set(opts) - known
    if unknown:
        raise ValueError(f"unknown synthetic option(s): {', '.join(sorted(unknown))}")
    return kind, ladder, opts


def synthetic_datasets(spec: str, seed: int):
    """Yield (name, Dfa) for each ladder rung."""
    kind, ladder, opts = parse_synthetic(spec)
    m = int(opts.get("m", 256))
    if kind == "clustered":
        noise = float(opts.get("noise", 0.05))
        for n in ladder:
            clusters = int(opts["clusters"]) if "clusters" in opts else max(1, n // int(opts.get("per_cluster", 32)))
            dfa = generate_clustered_dfa(n, m, min(clusters, n), noise, seed,
                                         forward_fraction=float(opts.get("forward", 0.125)))
            yield f"clustered-n{n}-c{clusters}-z{noise:g}", dfa
    else:
        for count in ladder:
            cfg = RuleSetConfig(rule_count=count, avg_length=float(opts.get("len", 34)),
                                wildcard_rate=float(opts.get("wildcard", 0.5)),
                                length_restriction_rate=float(opts.get("restrict", 0.33)), seed=seed)
            dfa = compile_regex_set(generate_rules(cfg), m, minimize=opts.get("minimize", "0") == "1")
            yield f"rules-{count}", dfa


def rules_dir_datasets(path):
    files = sorted(p for p in Path(path).iterdir() if p.is_file() and not p.name.startswith("."))
    for p in files:
        patterns = [pat for _, pat in read_rules(p)]
        yield p.stem, compile_regex_set(patterns, 256)


def warm_up(algos) -> None:
    """Load compiled kernels so the first timed run does not pay for it."""
    tiny = generate_clustered_dfa(64, 16, 4, 0.1, 0)
    for algo in algos:
        compress(tiny, AlgoSpec(algo, lsh=LshParams(k=4, r=4)))


def bench_row(name: str, dfa: Dfa, spec: AlgoSpec, dense_cap: int):
    """One CSV row; metrics are blank and ``error`` set when the run fails."""
    row = {"dataset": name, "n": dfa.state_count, "algo": spec.id,
           "L": spec.L if spec.family in ("refined", "cut") else "",
           "k": spec.lsh.k if spec.sparse else "", "r": spec.lsh.r if spec.sparse else "",
           "seed": spec.lsh.seed}
    try:
        d2fa, rep = compress(dfa, spec, dense_cap=dense_cap)
        if first_mismatch(dfa, d2fa) is not None:
            return row, "integrity: output not equivalent"
    except (ValueError, RuntimeError) as e:
        return row, f"{type(e).__name__}: {e}"
    ms = rep.elapsed_ms
    row.update(labeled_after=rep.labeled_after, default_count=rep.default_count,
               ratio=f"{rep.compression_ratio:.6f}", longest_delay=rep.longest_delay,
               t_graph_ms=f"{ms['graph']:.3f}", t_forest_ms=f"{ms['forest']:.3f}",
               t_build_ms=f"{ms['build']:.3f}", t_total_ms=f"{ms['total']:.3f}")
    return row, None


def summarize(rows) -> list[str]:
    """Sparse vs dense comparison for every (dataset, seed, family) pair."""
    done = {(r["dataset"], r["seed"], r["algo"]): r for r in rows if r.get("t_total_ms", "") != ""}
    lines = []
    for (name, seed, algo), sp in done.items():
        if not algo.endswith("-sp"):
            continue
        dense = done.get((name, seed, algo.removesuffix("-sp")))
        if dense is None:
            continue
        t_ratio = float(sp["t_total_ms"]) / max(float(dense["t_total_ms"]), 1e-9)
        size_sp = sp["labeled_after"] + sp["default_count"]
        size_d = dense["labeled_after"] + dense["default_count"]
        delta = 100.0 * (size_sp - size_d) / size_d
        lines.append(f"{name:<28} seed={seed:<4} {algo:<11} time_ratio={t_ratio:6.3f} "
                     f"size_delta={delta:+6.2f}%")
    return lines


def cmd_bench(args) -> int:
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    bad = [a for a in algos if a not in ALGORITHMS]
    if bad:
        return _fail(f"unknown algorithm(s) {', '.join(bad)}; choose from {', '.join(ALGORITHMS)}")
    try:
        seeds = [int(s) for s in args.seeds.split(",")]
        if args.synthetic:
            parse_synthetic(args.synthetic)
    except ValueError as e:
        return _fail(str(e))
    warm_up(algos)
    new_file = not os.path.exists(args.csv) or os.path.getsize(args.csv) == 0
    rows = []
    failures = integrity = 0
    with open(args.csv, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER, restval="")
        if new_file:
            writer.writeheader()
        for seed in seeds:
            try:
                source = (synthetic_datasets(args.synthetic, seed) if args.synthetic
                          else rules_dir_datasets(args.rules_dir))
                for name, dfa in source:
                    for algo in algos:
                        spec = AlgoSpec(algo, L=args.L, lsh=LshParams(k=args.k, r=args.r, seed=seed))
                        row, err = bench_row(name, dfa, spec, args.dense_cap)
                        writer.writerow(row)
                        fh.flush()
                        rows.append(row)
                        if err:
                            failures += 1
                            integrity += err.startswith("integrity")
                            print(f"{name} {algo} seed={seed}: {err}", file=sys.stderr)
                        else:
                            print(f"{name:<28} {algo:<11} seed={seed:<4} ratio={row['ratio']} "
                                  f"delay={row['longest_delay']} t_total_ms={row['t_total_ms']}")
            except (OSError, ValueError, RuntimeError) as e:
                return _fail(f"dataset construction failed: {e}")
    summary = summarize(rows)
    if summary:
        print("\nsparse vs dense")
        for line in summary:
            print(line)
    if failures:
        print(f"\n{failures} run(s) failed", file=sys.stderr)
    return EXIT_INTEGRITY if integrity else EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="d2fa", description="Compress DFAs with default transitions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compile", help="compile a rule file into a DFA")
    c.add_argument("--rules", required=True)
    c.add_argument("--alphabet", type=int, default=256)
    c.add_argument("--out", required=True)
    c.add_argument("--minimize", action="store_true")
    c.add_argument("--unanchored", action="store_true", help="match rules anywhere in the input")
    c.add_argument("--symbols", help="characters naming symbol ids 0..M-1 (restricted alphabets)")
    c.add_argument("--state-cap", type=int, default=2_000_000)
    c.set_defaults(func=cmd_compile)

    def lsh_flags(q):
        q.add_argument("--L", type=int, default=2, help="longest-delay bound (refined, cut)")
        q.add_argument("--k", type=int, default=8, help="characters hashed per LSH round")
        q.add_argument("--r", type=int, default=512, help="LSH rounds")
        q.add_argument("--dense-cap", type=int, default=DENSE_STATE_CAP)

    z = sub.add_parser("compress", help="compress a DFA into a D2FA")
    z.add_argument("--dfa", required=True)
    z.add_argument("--algo", required=True, choices=ALGORITHMS)
    lsh_flags(z)
    z.add_argument("--seed", type=int, default=0)
    z.add_argument("--out", required=True)
    z.add_argument("--stats", help="write the compression report as JSON")
    z.add_argument("--no-verify", action="store_true")
    z.set_defaults(func=cmd_compress)

    m = sub.add_parser("match", help="run input bytes through a D2FA")
    m.add_argument("--d2fa", required=True)
    m.add_argument("--input", required=True)
    m.add_argument("--symbols", help="characters naming symbol ids 0..M-1; default: byte value")
    m.add_argument("--report", action="store_true", help="also print a JSON summary")
    m.set_defaults(func=cmd_match)

    v = sub.add_parser("verify", help="check a D2FA against its DFA")
    v.add_argument("--dfa", required=True)
    v.add_argument("--d2fa", required=True)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run algorithms over a ladder of DFAs, append CSV rows")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--rules-dir")
    src.add_argument("--synthetic", help="e.g. clustered:n=1024/2048/4096,per_cluster=32,noise=0.05")
    b.add_argument("--algos", default="orig,orig-sp")
    b.add_argument("--seeds", default="0")
    b.add_argument("--csv", required=True)
    lsh_flags(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # --help and usage errors: hand back the code instead of exiting
        return e.code if isinstance(e.code, int) else EXIT_INPUT
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
