"""End-to-end compressors: Dfa -> (D2fa, CompressionReport)."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .automata import Dfa, bfs_depths
from .d2fa import CompressionReport, D2fa, build_from_forest
from .forest import (Forest, central_node, cut_to_diameter, kruskal_bounded_diameter,
                     kruskal_mst, prim_penalized)
from .graphs import DENSE_STATE_CAP, LshParams, build_srg, build_ssrg, lsh_partners

ALGORITHMS = ("orig", "orig-sp", "refined", "refined-sp", "cut", "cut-sp", "adfa", "adfa-sp")


@dataclass(frozen=True)
class AlgoSpec:
    id: str
    L: int = 2
    lsh: LshParams = field(default_factory=LshParams)

    def __post_init__(self):
        if self.id not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.id!r}; choose from {', '.join(ALGORITHMS)}")
        if self.L < 1:
            raise ValueError("L must be at least 1")

    @property
    def sparse(self) -> bool:
        return self.id.endswith("-sp")

    @property
    def family(self) -> str:
        return self.id.removesuffix("-sp")

    def params(self) -> dict:
        out = {}
        if self.family in ("refined", "cut"):
            out["L"] = self.L
        if self.sparse:
            out.update(k=self.lsh.k, r=self.lsh.r, seed=self.lsh.seed)
        return out


class _Clock:
    def __init__(self):
        self.phases: dict[str, float] = {}
        self._t0 = time.perf_counter()
        self._mark = self._t0

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        self.phases[name] = (now - self._mark) * 1000.0
        self._mark = now

    def report(self) -> dict:
        out = dict(self.phases)
        out["total"] = (self._mark - self._t0) * 1000.0
        return out


def _graph(dfa: Dfa, sparse: bool, lsh: LshParams, dense_cap: int):
    return build_ssrg(dfa, lsh) if sparse else build_srg(dfa, dense_cap)


def compress_orig(dfa: Dfa, sparse: bool = False, lsh: LshParams = LshParams(),
                  dense_cap: int = DENSE_STATE_CAP):
    clock = _Clock()
    graph = _graph(dfa, sparse, lsh, dense_cap)
    clock.lap("graph")
    forest = kruskal_mst(graph)
    clock.lap("forest")
    out = build_from_forest(dfa, forest)
    clock.lap("build")
    spec = AlgoSpec("orig-sp" if sparse else "orig", lsh=lsh)
    return out, CompressionReport.of(spec.id, spec.params(), dfa, out, clock.report(), graph.edge_count)


def compress_refined(dfa: Dfa, L: int = 2, sparse: bool = False, lsh: LshParams = LshParams(),
                     dense_cap: int = DENSE_STATE_CAP):
    spec = AlgoSpec("refined-sp" if sparse else "refined", L=L, lsh=lsh)
    clock = _Clock()
    graph = _graph(dfa, sparse, lsh, dense_cap)
    clock.lap("graph")
    forest = kruskal_bounded_diameter(graph, 2 * L)
    clock.lap("forest")
    out = build_from_forest(dfa, forest)
    clock.lap("build")
    return out, CompressionReport.of(spec.id, spec.params(), dfa, out, clock.report(), graph.edge_count)


def cut_forest(graph, L: int) -> Forest:
    """Kruskal tree -> its central node -> depth-penalised Prim tree from
    there -> fewest cuts to diameter 2L -> rooted at central nodes."""
    t0 = kruskal_mst(graph)
    v0 = central_node(t0, 0)
    tree = prim_penalized(graph, v0)
    return cut_to_diameter(tree.forest, 2 * L)


def compress_cut(dfa: Dfa, L: int = 2, sparse: bool = True, lsh: LshParams = LshParams(),
                 dense_cap: int = DENSE_STATE_CAP):
    spec = AlgoSpec("cut-sp" if sparse else "cut", L=L, lsh=lsh)
    clock = _Clock()
    graph = _graph(dfa, sparse, lsh, dense_cap)
    clock.lap("graph")
    forest = cut_forest(graph, L)
    clock.lap("forest")
    out = build_from_forest(dfa, forest)
    clock.lap("build")
    return out, CompressionReport.of(spec.id, spec.params(), dfa, out, clock.report(), graph.edge_count)


def _forest_from_targets(target: np.ndarray) -> Forest:
    # depth-decreasing targets cannot form cycles
    return Forest(target)


def compress_adfa(dfa: Dfa):
    """Each non-start state defaults to its most similar strictly shallower
    state (ties: shallower, then smaller id), when that saves a transition."""
    clock = _Clock()
    depth = bfs_depths(dfa)
    clock.lap("graph")
    order = np.lexsort((np.arange(dfa.state_count), depth))
    target, best = K.adfa_dense_defaults(dfa.table, depth, order)
    target = np.where(best >= 2, target, -1)
    clock.lap("forest")
    out = build_from_forest(dfa, _forest_from_targets(target))
    clock.lap("build")
    return out, CompressionReport.of("adfa", {}, dfa, out, clock.report(), 0)


def adfa_sparse_defaults(dfa: Dfa, depth: np.ndarray, lsh: LshParams) -> np.ndarray:
    """Default targets after ``lsh.r`` rounds of bucket-partner proposals.

    A proposal v for u is taken when v is shallower and strictly more similar
    than u's current default; "no default yet" counts as similarity 1, so the
    first accepted default already saves a transition.
    """
    n = dfa.state_count
    target = np.full(n, -1, dtype=np.int64)
    current = np.ones(n, dtype=np.int64)
    for i in range(lsh.r):
        us, vs = lsh_partners(dfa, lsh, i)
        shallower = depth[vs] < depth[us]
        us, vs = us[shallower], vs[shallower]
        if us.size == 0:
            continue
        sims = K.pair_similarities(dfa.table, us.astype(np.int32), vs.astype(np.int32)).astype(np.int64)
        better = sims > current[us]
        target[us[better]] = vs[better]
        current[us[better]] = sims[better]
    return target


def compress_adfa_sparse(dfa: Dfa, lsh: LshParams = LshParams()):
    clock = _Clock()
    depth = bfs_depths(dfa)
    clock.lap("graph")
    target = adfa_sparse_defaults(dfa, depth, lsh)
    clock.lap("forest")
    out = build_from_forest(dfa, _forest_from_targets(target))
    clock.lap("build")
    spec = AlgoSpec("adfa-sp", lsh=lsh)
    return out, CompressionReport.of(spec.id, spec.params(), dfa, out, clock.report(), 0)


def compress(dfa: Dfa, spec: AlgoSpec, dense_cap: int = DENSE_STATE_CAP) -> tuple[D2fa, CompressionReport]:
    fam, sparse = spec.family, spec.sparse
    if fam == "orig":
        return compress_orig(dfa, sparse, spec.lsh, dense_cap)
    if fam == "refined":
        return compress_refined(dfa, spec.L, sparse, spec.lsh, dense_cap)
    if fam == "cut":
        return compress_cut(dfa, spec.L, sparse, spec.lsh, dense_cap)
    if sparse:
        return compress_adfa_sparse(dfa, spec.lsh)
    return compress_adfa(dfa)


__all__ = ["ALGORITHMS", "AlgoSpec", "compress", "compress_orig", "compress_refined",
           "compress_cut", "compress_adfa", "compress_adfa_sparse", "cut_forest",
           "adfa_sparse_defaults"]
