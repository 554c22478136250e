"""Spanning trees and forests over similarity graphs.

A :class:`Forest` is a parent array; its edges point toward the roots and,
once passed through :func:`root_and_direct`, become default transitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .graphs import WeightedGraph

PENALTY_EXPONENT_CAP = 40


class ForestError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Forest:
    parent: np.ndarray  # -1 marks a root

    def __post_init__(self):
        parent = np.ascontiguousarray(self.parent, dtype=np.int32)
        if parent.ndim != 1 or parent.size == 0:
            raise ForestError("parent array must be non-empty and one-dimensional")
        if parent.min() < -1 or parent.max() >= parent.size:
            raise ForestError("parent id out of range")
        parent.setflags(write=False)
        object.__setattr__(self, "parent", parent)

    @property
    def node_count(self) -> int:
        return int(self.parent.size)

    @property
    def roots(self) -> list[int]:
        return np.flatnonzero(self.parent < 0).tolist()

    def edges(self) -> list[tuple[int, int]]:
        """(child, parent) pairs."""
        child = np.flatnonzero(self.parent >= 0)
        return list(zip(child.tolist(), self.parent[child].tolist()))

    def check_acyclic(self) -> None:
        self.depth  # noqa: B018 - raises on cycles

    @cached_property
    def depth(self) -> np.ndarray:
        """Number of parent hops from each node to its root."""
        n = self.node_count
        depth = np.full(n, -1, dtype=np.int64)
        depth[self.parent < 0] = 0
        parent = self.parent.tolist()
        for x in range(n):
            if depth[x] >= 0:
                continue
            path = []
            y = x
            while depth[y] < 0:
                path.append(y)
                if len(path) > n:
                    raise ForestError("cycle in parent pointers")
                y = parent[y]
            base = depth[y]
            for step, z in enumerate(reversed(path), 1):
                depth[z] = base + step
        return depth

    @cached_property
    def tree_id(self) -> np.ndarray:
        """Root of the tree each node belongs to."""
        tid = np.arange(self.node_count)
        order = np.argsort(self.depth, kind="stable")
        parent = self.parent
        for x in order:
            if parent[x] >= 0:
                tid[x] = tid[parent[x]]
        return tid

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for c, p in self.edges():
            adj[c].append(p)
            adj[p].append(c)
        for row in adj:
            row.sort()
        return adj

    @classmethod
    def from_edges(cls, n: int, edges) -> "Forest":
        """Root each component of an undirected edge set at its smallest node."""
        adj: list[list[int]] = [[] for _ in range(n)]
        for a, b in edges:
            adj[int(a)].append(int(b))
            adj[int(b)].append(int(a))
        parent = np.full(n, -1, dtype=np.int64)
        seen = np.zeros(n, dtype=bool)
        for s in range(n):
            if seen[s]:
                continue
            seen[s] = True
            stack = [s]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if seen[y]:
                        if y != parent[x]:
                            if parent[y] != x:
                                raise ForestError("edge set contains a cycle")
                        continue
                    seen[y] = True
                    parent[y] = x
                    stack.append(y)
        return cls(parent)


def _bfs(adj, source):
    dist = {source: 0}
    pred = {source: -1}
    order = [source]
    for x in order:
        for y in adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                pred[y] = x
                order.append(y)
    return dist, pred, order


def _farthest(dist) -> int:
    best = max(dist.values())
    return min(x for x, d in dist.items() if d == best)


def _center(adj, start) -> tuple[int, int, list[int]]:
    """(central node, diameter, component nodes) of start's tree."""
    dist, _, nodes = _bfs(adj, start)
    a = _farthest(dist)
    dist, pred, _ = _bfs(adj, a)
    b = _farthest(dist)
    path = [b]
    while path[-1] != a:
        path.append(pred[path[-1]])
    diameter = len(path) - 1
    c = min(path[diameter // 2], path[(diameter + 1) // 2])
    return c, diameter, nodes


def central_node(forest: Forest, node: int = 0) -> int:
    """Minimum-eccentricity node of the tree containing ``node``; the
    smaller id wins when there are two."""
    return _center(forest.adjacency(), node)[0]


def tree_diameters(forest: Forest) -> dict[int, int]:
    """Diameter of each tree, keyed by its smallest node."""
    adj = forest.adjacency()
    seen = np.zeros(forest.node_count, dtype=bool)
    out = {}
    for s in range(forest.node_count):
        if seen[s]:
            continue
        _, diameter, nodes = _center(adj, s)
        seen[nodes] = True
        out[s] = diameter
    return out


def root_and_direct(forest: Forest) -> Forest:
    """Re-root every tree at its central node, parents pointing rootward."""
    adj = forest.adjacency()
    n = forest.node_count
    parent = np.full(n, -1, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    for s in range(n):
        if seen[s]:
            continue
        c, _, nodes = _center(adj, s)
        seen[nodes] = True
        _, pred, _ = _bfs(adj, c)
        for x, p in pred.items():
            parent[x] = p
    return Forest(parent)


def kruskal_mst(graph: WeightedGraph) -> Forest:
    """Maximum spanning forest, rooted at central nodes.

    Ties go by weight descending, then smaller endpoint, then larger endpoint.
    """
    chosen = kruskal_edges(graph)
    return root_and_direct(Forest.from_edges(graph.node_count, zip(graph.u[chosen], graph.v[chosen])))


def kruskal_edges(graph: WeightedGraph) -> np.ndarray:
    """Boolean mask over ``graph``'s edges selected by Kruskal."""
    return K.kruskal_select(graph.node_count, graph.u, graph.v, graph.w, graph.max_weight)


def kruskal_bounded_diameter(graph: WeightedGraph, delta: int) -> Forest:
    """Greedy maximum spanning forest whose trees have diameter <= delta.

    Heavier edges first; among equal weights, the merge that grows the larger
    of the two diameters least goes first. Edges that would exceed ``delta``
    are skipped.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    chosen = K.bounded_diameter_select(graph.node_count, graph.u, graph.v, graph.w,
                                       graph.max_weight, delta)
    return root_and_direct(Forest.from_edges(graph.node_count, zip(graph.u[chosen], graph.v[chosen])))


def penalized_weight(sim: int, depth: int) -> int:
    """Similarity minus 2^depth, the exponent saturating at 40."""
    return int(sim) - (1 << min(int(depth), PENALTY_EXPONENT_CAP))


@lru_cache(maxsize=32)
def penalty_ranks(max_weight: int, penalize: bool = True) -> np.ndarray:
    """rank[d, s]: position of (depth d, similarity s) in the order
    (penalized weight desc, similarity desc); lower is better."""
    depths = np.arange(PENALTY_EXPONENT_CAP + 1)
    sims = np.arange(max_weight + 1)
    if not penalize:
        rank = np.tile(max_weight - sims, (depths.size, 1)).astype(np.int64)
        rank.setflags(write=False)
        return rank
    eff = sims[None, :] - (np.int64(1) << depths[:, None])
    pairs = sorted({(int(e), int(s)) for e, s in zip(eff.ravel(), np.broadcast_to(sims, eff.shape).ravel())},
                   key=lambda es: (-es[0], -es[1]))
    index = {es: i for i, es in enumerate(pairs)}
    rank = np.empty(eff.shape, dtype=np.int64)
    for d in depths:
        for s in sims:
            rank[d, s] = index[(int(eff[d, s]), int(s))]
    rank.setflags(write=False)
    return rank


class PrimTree(NamedTuple):
    forest: Forest  # rooted at v0
    depth: np.ndarray


def prim_penalized(graph: WeightedGraph, v0: int, penalize: bool = True) -> PrimTree:
    """Spanning tree grown from ``v0``. A candidate edge (u, v) with u in the
    tree is queued at similarity - 2^(depth(u) + 1); with ``penalize=False``
    this is plain maximum-spanning-tree Prim."""
    n = graph.node_count
    if n > K.MAX_PACKED_NODES:
        raise ValueError(f"graph too large for prim_penalized ({n} nodes)")
    if not 0 <= v0 < n:
        raise ValueError("v0 out of range")
    rank = penalty_ranks(graph.max_weight, penalize)
    parent, depth, added = K.prim_select(n, graph.u, graph.v, graph.w, v0, rank)
    if added < n:
        raise ForestError(f"graph is disconnected: reached {added} of {n} nodes from {v0}")
    return PrimTree(Forest(parent), depth)


def cut_to_diameter(forest: Forest, delta: int) -> Forest:
    """Remove the fewest edges so that every tree has diameter <= delta.

    Bottom-up: each node gathers its children's heights (+1); while the two
    largest exceed ``delta`` together, or a single one exceeds it, the edge to
    the tallest child is cut. The pieces are re-rooted at central nodes.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    parent = forest.parent
    n = forest.node_count
    order = np.argsort(-forest.depth, kind="stable")
    height = np.zeros(n, dtype=np.int64)
    reach: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    cut = np.zeros(n, dtype=bool)
    for x in order.tolist():
        arms = sorted(reach[x], reverse=True)
        while arms and (arms[0][0] > delta or (len(arms) > 1 and arms[0][0] + arms[1][0] > delta)):
            cut[arms.pop(0)[1]] = True
        height[x] = arms[0][0] if arms else 0
        p = parent[x]
        if p >= 0:
            reach[p].append((int(height[x]) + 1, x))
    kept = [(c, p) for c, p in forest.edges() if not cut[c]]
    return root_and_direct(Forest.from_edges(n, kept))
