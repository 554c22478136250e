"""Complete DFAs over an integer alphabet, plus depths, file I/O and a
synthetic generator of DFAs whose states fall into similarity clusters."""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class DfaFormatError(ValueError):
    """Raised for malformed or inconsistent DFA files."""


@dataclass(frozen=True, eq=False)
class Dfa:
    """Complete DFA: ``table[u, c]`` is the successor of state ``u`` on ``c``."""

    table: np.ndarray
    start: int = 0
    accepting: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        table = np.ascontiguousarray(self.table, dtype=np.int32)
        if table.ndim != 2 or table.shape[0] < 1 or table.shape[1] < 1:
            raise ValueError("transition table must be a non-empty n x m array")
        n = table.shape[0]
        if table.min() < 0 or table.max() >= n:
            raise ValueError("state id out of range")
        if not 0 <= self.start < n:
            raise ValueError("start state out of range")
        accepting = frozenset(int(a) for a in self.accepting)
        if any(not 0 <= a < n for a in accepting):
            raise ValueError("accepting state out of range")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "accepting", accepting)

    @property
    def state_count(self) -> int:
        return self.table.shape[0]

    @property
    def alphabet_size(self) -> int:
        return self.table.shape[1]

    @cached_property
    def columns(self) -> np.ndarray:
        """Transposed table (alphabet x states), made contiguous once."""
        cols = np.ascontiguousarray(self.table.T)
        cols.setflags(write=False)
        return cols

    def step(self, u: int, c: int) -> int:
        return int(self.table[u, c])

    def run(self, symbols) -> int:
        x = self.start
        for c in symbols:
            x = int(self.table[x, c])
        return x

    def accepts(self, symbols) -> bool:
        return self.run(symbols) in self.accepting

    def accepting_mask(self) -> np.ndarray:
        mask = np.zeros(self.state_count, dtype=bool)
        mask[list(self.accepting)] = True
        return mask

    def unreachable_states(self) -> list[int]:
        seen = reachable_mask(self.table, self.start)
        return np.flatnonzero(~seen).tolist()


def reachable_mask(table: np.ndarray, start: int) -> np.ndarray:
    n = table.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    frontier = np.array([start])
    while frontier.size:
        nxt = np.unique(table[frontier].ravel())
        nxt = nxt[~seen[nxt]]
        seen[nxt] = True
        frontier = nxt
    return seen


def bfs_depths(dfa: Dfa) -> np.ndarray:
    """Shortest-path distance (in transitions) from the start state."""
    n = dfa.state_count
    depth = np.full(n, -1, dtype=np.int64)
    depth[dfa.start] = 0
    frontier = np.array([dfa.start])
    level = 0
    while frontier.size:
        level += 1
        nxt = np.unique(dfa.table[frontier].ravel())
        nxt = nxt[depth[nxt] < 0]
        depth[nxt] = level
        frontier = nxt
    return depth


def renumber_bfs(table: np.ndarray, start: int, accepting) -> Dfa:
    """Relabel states in BFS discovery order (start becomes 0), dropping
    anything unreachable."""
    n = table.shape[0]
    new_id = np.full(n, -1, dtype=np.int64)
    new_id[start] = 0
    order = [start]
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for y in table[x]:
            y = int(y)
            if new_id[y] < 0:
                new_id[y] = len(order)
                order.append(y)
                queue.append(y)
    order = np.array(order)
    new_table = new_id[table[order]]
    new_acc = {int(new_id[a]) for a in accepting if new_id[a] >= 0}
    return Dfa(new_table, 0, frozenset(new_acc))


# --------------------------------------------------------------------------
# synthetic clustered DFAs


@dataclass(frozen=True, eq=False)
class ClusterLayout:
    """Cluster assignment and the prototype row each cluster shares."""

    cluster_of: np.ndarray  # (n,)
    prototypes: np.ndarray  # (C, m)


def clustered_layout(n: int, alphabet_size: int, cluster_count: int, seed: int,
                     forward_fraction: float = 0.125) -> ClusterLayout:
    """Cluster prototypes arranged as a chain.

    States are split into ``cluster_count`` contiguous blocks (state 0, the
    start, sits in block 0). Every prototype shares one background row whose
    cells point into block 0, the way most transitions of a signature DFA
    fall back to shallow states. Cluster ``X`` additionally owns a set of
    forward columns that point into block ``X + 1``; the last block points
    back to block 0. Block ``X`` therefore lies at BFS depth about ``X``.
    """
    if n < 1 or alphabet_size < 1:
        raise ValueError("n and alphabet_size must be positive")
    if not 1 <= cluster_count <= n:
        raise ValueError("cluster_count must be in [1, n]")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    m = alphabet_size
    bounds = np.linspace(0, n, cluster_count + 1).round().astype(np.int64)
    cluster_of = np.repeat(np.arange(cluster_count), np.diff(bounds))
    members = [np.arange(bounds[x], bounds[x + 1]) for x in range(cluster_count)]

    block0 = rng.permutation(members[0])
    background = block0[np.arange(m) % block0.size]
    background = background[rng.permutation(m)]

    prototypes = np.empty((cluster_count, m), dtype=np.int64)
    for x in range(cluster_count):
        nxt = members[(x + 1) % cluster_count]
        f = max(nxt.size, int(round(m * forward_fraction)))
        f = min(f, m)
        cols = rng.choice(m, size=f, replace=False)
        row = background.copy()
        row[cols] = rng.permutation(nxt)[np.arange(f) % nxt.size]
        prototypes[x] = row
    return ClusterLayout(cluster_of, prototypes)


def generate_clustered_dfa(n: int, alphabet_size: int, cluster_count: int,
                           noise: float, seed: int,
                           forward_fraction: float = 0.125) -> Dfa:
    """DFA whose states copy their cluster's prototype row.

    A ``noise`` fraction of cells is independently redrawn from the values
    of the state's own prototype row, so noise perturbs similarity without
    adding shortcuts between clusters. States that end up unreachable get a
    cell of some reachable state pointed at them.
    """
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must lie in [0, 1]")
    layout = clustered_layout(n, alphabet_size, cluster_count, seed, forward_fraction)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    m = alphabet_size
    table = layout.prototypes[layout.cluster_of].copy()
    if noise > 0:
        mask = rng.random((n, m)) < noise
        rows, _ = np.nonzero(mask)
        picks = rng.integers(0, m, size=rows.size)
        table[mask] = layout.prototypes[layout.cluster_of[rows], picks]
    _patch_reachability(table, 0, rng)
    return Dfa(table, 0, frozenset())


def _grow(table, src, reached, protected) -> None:
    """BFS from ``src`` over unreached states, protecting the tree cells."""
    reached[src] = True
    frontier = np.array([src])
    while frontier.size:
        targets = table[frontier]
        flat = targets.ravel()
        fresh = ~reached[flat]
        if not fresh.any():
            break
        pos = np.flatnonzero(fresh)
        new, first = np.unique(flat[pos], return_index=True)
        pos = pos[first]
        protected[frontier[pos // table.shape[1]], pos % table.shape[1]] = True
        reached[new] = True
        frontier = new


def _patch_reachability(table: np.ndarray, start: int, rng: np.random.Generator) -> None:
    """Point a cell of some reachable state at every unreachable state.

    Cells on a BFS tree are never overwritten, so a patch cannot cut off a
    state reached earlier.
    """
    if reachable_mask(table, start).all():
        return
    n, m = table.shape
    reached = np.zeros(n, dtype=bool)
    protected = np.zeros((n, m), dtype=bool)
    _grow(table, start, reached, protected)
    for s in range(n):
        if reached[s]:
            continue
        hosts = np.flatnonzero(reached)
        for _ in range(64):
            u, c = int(hosts[rng.integers(hosts.size)]), int(rng.integers(m))
            if not protected[u, c]:
                break
        else:
            free = np.argwhere(reached[:, None] & ~protected)
            u, c = (int(x) for x in free[rng.integers(len(free))])
        table[u, c] = s
        protected[u, c] = True
        _grow(table, s, reached, protected)


# --------------------------------------------------------------------------
# text format


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _expect(lines, keyword: str, path) -> list[str]:
    try:
        lineno, line = next(lines)
    except StopIteration:
        raise DfaFormatError(f"{path}: truncated header, expected '{keyword}'") from None
    parts = line.split()
    if parts[0] != keyword:
        raise DfaFormatError(f"{path}:{lineno}: expected '{keyword}', got '{parts[0]}'")
    return parts[1:]


def _int(token: str, path, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise DfaFormatError(f"{path}: malformed {what}: {token!r}") from None


def parse_header(lines, magic: str, path):
    """Shared by the DFA and D2FA formats: returns (n, m, start, accepting)."""
    version = _expect(lines, magic, path)
    if version != ["1"]:
        raise DfaFormatError(f"{path}: unsupported {magic} version {' '.join(version)}")
    rest = _expect(lines, "states", path)
    n = _int(rest[0], path, "state count") if rest else 0
    rest = _expect(lines, "alphabet", path)
    m = _int(rest[0], path, "alphabet size") if rest else 0
    if n < 1 or m < 1:
        raise DfaFormatError(f"{path}: states and alphabet must be positive")
    rest = _expect(lines, "start", path)
    start = _int(rest[0], path, "start state") if rest else -1
    if not 0 <= start < n:
        raise DfaFormatError(f"{path}: state id out of range: start {start}")
    rest = _expect(lines, "accept", path)
    if not rest:
        raise DfaFormatError(f"{path}: malformed accept line")
    k = _int(rest[0], path, "accept count")
    ids = [_int(t, path, "accepting state") for t in rest[1:]]
    if len(ids) != k:
        raise DfaFormatError(f"{path}: accept line lists {len(ids)} ids, header says {k}")
    for a in ids:
        if not 0 <= a < n:
            raise DfaFormatError(f"{path}: state id out of range: accepting {a}")
    return n, m, start, frozenset(ids)


def write_dfa(dfa: Dfa, path) -> None:
    acc = sorted(dfa.accepting)
    with open(path, "w") as fh:
        fh.write("DFA 1\n")
        fh.write(f"states {dfa.state_count}\n")
        fh.write(f"alphabet {dfa.alphabet_size}\n")
        fh.write(f"start {dfa.start}\n")
        fh.write(" ".join(["accept", str(len(acc))] + [str(a) for a in acc]) + "\n")
        for row in dfa.table:
            fh.write(" ".join(map(str, row.tolist())))
            fh.write("\n")


def read_dfa(path: str | os.PathLike) -> Dfa:
    with open(path) as fh:
        text = fh.read()
    lines = _content_lines(text)
    n, m, start, accepting = parse_header(lines, "DFA", path)
    rows = []
    for lineno, line in lines:
        row = line.split()
        if len(row) != m:
            raise DfaFormatError(f"{path}:{lineno}: expected {m} entries, got {len(row)}")
        rows.append(row)
    if len(rows) != n:
        raise DfaFormatError(f"{path}: truncated table: {len(rows)} of {n} rows")
    try:
        table = np.array(rows, dtype=np.int64)
    except ValueError:
        raise DfaFormatError(f"{path}: non-integer table entry") from None
    bad = np.argwhere((table < 0) | (table >= n))
    if bad.size:
        u, c = bad[0]
        raise DfaFormatError(f"{path}: state id out of range: row {u} column {c} holds {table[u, c]}")
    dfa = Dfa(table, start, accepting)
    unreachable = dfa.unreachable_states()
    if unreachable:
        shown = ", ".join(map(str, unreachable[:20]))
        more = "" if len(unreachable) <= 20 else f" (+{len(unreachable) - 20} more)"
        raise DfaFormatError(f"{path}: unreachable state(s): {shown}{more}")
    return dfa
