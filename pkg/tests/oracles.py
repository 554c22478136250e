"""Slow, independent reference implementations used as test oracles.

Nothing here imports the package's algorithms; only plain Python and, for
the subset search, numpy.
"""

import itertools
import math
import re
from collections import deque

import numpy as np


def sim(table, u, v):
    return sum(1 for a, b in zip(table[u], table[v]) if a == b)


def shortest_paths(table, start):
    """Floyd-Warshall distances from ``start``."""
    n = len(table)
    inf = float("inf")
    d = [[0 if i == j else inf for j in range(n)] for i in range(n)]
    for u, row in enumerate(table):
        for t in row:
            if t != u:
                d[u][t] = 1
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik == inf:
                continue
            di = d[i]
            for j in range(n):
                if dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
    return d[start]


def resolve(labeled, default, u, c, guard=10_000):
    """Follow defaults until a c-labeled transition exists."""
    hops = 0
    while c not in labeled[u]:
        u = default[u]
        hops += 1
        if u is None or hops > guard:
            raise LookupError("unresolvable")
    return labeled[u][c], hops


def max_spanning_forest_weight(n, edges):
    """Exact best weight over acyclic edge subsets by exhaustive branch and
    bound. ``edges`` are (u, v, w) with w >= 0, taken in input order."""
    edges = list(edges)
    suffix = [0] * (len(edges) + 1)
    for i in range(len(edges) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + max(edges[i][2], 0)
    best = [0]
    comp = list(range(n))

    def find(x):
        while comp[x] != x:
            x = comp[x]
        return x

    def go(i, weight):
        if weight + suffix[i] <= best[0]:
            return
        if i == len(edges):
            best[0] = weight
            return
        u, v, w = edges[i]
        a, b = find(u), find(v)
        if a != b:
            comp[b] = a
            go(i + 1, weight + w)
            comp[b] = b
        go(i + 1, weight)

    go(0, 0)
    return best[0]


def tree_distances(n, edges):
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    dist = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        dist[s, s] = 0
        q = deque([s])
        while q:
            x = q.popleft()
            for y in adj[x]:
                if dist[s, y] < 0:
                    dist[s, y] = dist[s, x] + 1
                    q.append(y)
    return dist


def diameters(n, edges):
    """Diameter of each connected component (as a sorted list)."""
    dist = tree_distances(n, edges)
    seen, out = set(), []
    for s in range(n):
        if s in seen:
            continue
        comp = [x for x in range(n) if dist[s, x] >= 0]
        seen.update(comp)
        out.append(int(max(dist[a, b] for a in comp for b in comp)))
    return sorted(out)


def bounded_greedy(n, edges, delta):
    """Slow restatement of the diameter-constrained greedy: per weight group,
    repeatedly take the edge with the least growth of the larger diameter,
    recomputing every diameter from scratch."""
    edges = [(int(u), int(v), int(w)) for u, v, w in edges]
    kept = []

    def comp_of(dist, x):
        return frozenset(y for y in range(n) if dist[x, y] >= 0)

    for w in sorted({e[2] for e in edges}, reverse=True):
        group = sorted((u, v) for u, v, ww in edges if ww == w)
        while True:
            dist = tree_distances(n, kept)
            best = None
            for u, v in group:
                if dist[u, v] >= 0:
                    continue
                before = max(max(dist[a, b] for a in comp_of(dist, x) for b in comp_of(dist, x))
                             for x in (u, v))
                after = tree_distances(n, kept + [(u, v)])
                merged = max(int(after[x].max()) for x in range(n) if after[u, x] >= 0)
                if merged > delta:
                    continue
                cand = (merged - before, u, v)
                if best is None or cand < best:
                    best = cand
            if best is None:
                break
            kept.append(best[1:])
    return sorted(kept)


def _path_edges(n, edges, a, b):
    adj = [[] for _ in range(n)]
    for i, (x, y) in enumerate(edges):
        adj[x].append((y, i))
        adj[y].append((x, i))
    prev = {a: None}
    q = deque([a])
    while q:
        x = q.popleft()
        for y, i in adj[x]:
            if y not in prev:
                prev[y] = (x, i)
                q.append(y)
    mask = 0
    x = b
    while prev[x] is not None:
        x, i = prev[x]
        mask |= 1 << i
    return mask


def min_cuts(n, edges, delta):
    """Fewest tree edges to delete so every piece has diameter <= delta,
    searching all edge subsets."""
    edges = list(edges)
    m = len(edges)
    dist = tree_distances(n, edges)
    far = [_path_edges(n, edges, a, b) for a in range(n) for b in range(a + 1, n)
           if dist[a, b] > delta]
    if not far:
        return 0
    subsets = np.arange(1 << m, dtype=np.int64)
    ok = np.ones(subsets.size, dtype=bool)
    for mask in far:
        ok &= (subsets & mask) != 0
    return int(_popcounts(m)[ok].min())


_POPCOUNTS = {}


def _popcounts(m):
    if m not in _POPCOUNTS:
        x = np.arange(1 << m, dtype=np.int64)
        _POPCOUNTS[m] = sum((x >> i) & 1 for i in range(max(m, 1)))
    return _POPCOUNTS[m]


def collision_probability(s, m, k):
    """Chance that k distinct characters drawn from m all land among the s
    columns where two rows agree."""
    return math.comb(s, k) / math.comb(m, k)


def regex_accepts(rules, symbols, s):
    """Python's backtracking engine as the reference; ``s`` is a list of
    symbol ids, ``symbols`` maps ids to characters."""
    text = "".join(symbols[c] for c in s)
    return any(re.fullmatch(r, text, flags=re.DOTALL | re.ASCII) for r in rules)


def all_strings(alphabet_size, max_len):
    for length in range(max_len + 1):
        yield from itertools.product(range(alphabet_size), repeat=length)
