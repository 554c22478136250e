"""Similarity graphs over DFA states: the complete space reduction graph and
its LSH-sampled sparse counterpart."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .automata import Dfa

DENSE_STATE_CAP = 100_000

# two-lane multilinear hashing modulo the Mersenne prime 2^31 - 1
_P31 = K.MERSENNE_31


class GraphTooLarge(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph; edges are parallel arrays with ``u < v``, unique and
    sorted by ``(u, v)``."""

    node_count: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    @property
    def edge_count(self) -> int:
        return int(self.u.shape[0])

    @property
    def max_weight(self) -> int:
        return int(self.w.max()) if self.edge_count else 0

    def edges(self):
        return zip(self.u.tolist(), self.v.tolist(), self.w.tolist())

    def weight_map(self) -> dict[tuple[int, int], int]:
        return {(a, b): w for a, b, w in self.edges()}

    @classmethod
    def from_edges(cls, n: int, edges) -> "WeightedGraph":
        """Canonicalise arbitrary (u, v, w) triples; later duplicates are dropped."""
        seen = {}
        for a, b, w in edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError("self edge")
            key = (min(a, b), max(a, b))
            seen.setdefault(key, int(w))
        keys = sorted(seen)
        u = np.array([k[0] for k in keys], dtype=np.int32)
        v = np.array([k[1] for k in keys], dtype=np.int32)
        w = np.array([seen[k] for k in keys], dtype=np.int16)
        if keys and max(k[1] for k in keys) >= n:
            raise ValueError("node id out of range")
        return cls(n, u, v, w)


@dataclass(frozen=True)
class LshParams:
    k: int = 8
    r: int = 512
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.r < 0:
            raise ValueError("r must be non-negative")


def build_srg(dfa: Dfa, cap: int = DENSE_STATE_CAP) -> WeightedGraph:
    """All n(n-1)/2 state pairs weighted by similarity."""
    n = dfa.state_count
    if n > cap:
        raise GraphTooLarge(f"dense SRG refused: {n} states exceeds cap {cap}")
    us, vs, ws = K.complete_graph_edges(dfa.table)
    return WeightedGraph(n, us, vs, ws)


def _hash_keys(round_seed: int, k: int) -> np.ndarray:
    rng = np.random.default_rng(round_seed)
    return rng.integers(1, _P31, size=(2, k + 1), dtype=np.int64)


def lsh_signature(dfa: Dfa, v: int, chars, round_seed: int) -> int:
    """Hash of the successor sequence ``delta(v, c_1), ..., delta(v, c_k)``.

    Distinct sequences collide with probability below 2^-60 over the choice
    of ``round_seed``.
    """
    chars = np.asarray(chars, dtype=np.int64)
    keys = _hash_keys(round_seed, chars.size)
    return int(K.multilinear_hashes(dfa.columns[:, v:v + 1], chars, keys)[0])


def lsh_signatures(dfa: Dfa, chars, round_seed: int) -> np.ndarray:
    chars = np.asarray(chars, dtype=np.int64)
    keys = _hash_keys(round_seed, chars.size)
    return K.multilinear_hashes(dfa.columns, chars, keys)


def round_generator(seed: int, round_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(round_index,)))


def lsh_partners(dfa: Dfa, params: LshParams, round_index: int):
    """One LSH round: every state in a bucket of size >= 2 draws one other
    bucket member uniformly. Returns parallel arrays (u, partner), u ascending."""
    m = dfa.alphabet_size
    rng = round_generator(params.seed, round_index)
    # small alphabets hash every character
    chars = rng.choice(m, size=min(params.k, m), replace=False)
    round_seed = int(rng.integers(0, 2**63 - 1))
    h = lsh_signatures(dfa, chars, round_seed)
    draw = rng.random(h.size)
    return K.bucket_partners(h, draw)


def build_ssrg(dfa: Dfa, params: LshParams = LshParams()) -> WeightedGraph:
    """Start-state star plus LSH-sampled edges over ``params.r`` rounds;
    similarities are computed once per distinct edge at the end."""
    n = dfa.state_count
    q0 = dfa.start
    others = np.delete(np.arange(n, dtype=np.int64), q0)
    keys = [np.minimum(q0, others) * n + np.maximum(q0, others)]
    for i in range(params.r):
        a, b = lsh_partners(dfa, params, i)
        keys.append(np.minimum(a, b) * n + np.maximum(a, b))
    key = np.unique(np.concatenate(keys))
    us = (key // n).astype(np.int32)
    vs = (key % n).astype(np.int32)
    ws = K.pair_similarities(dfa.table, us, vs)
    return WeightedGraph(n, us, vs, ws)


def write_graph(graph: WeightedGraph, path, header: str = "SRG 1") -> None:
    with open(path, "w") as fh:
        fh.write(f"{header}\n")
        for a, b, w in graph.edges():
            fh.write(f"{a} {b} {w}\n")
