"""Compiled inner loops.

Everything here works on flat numpy arrays so the public modules can keep
their own types. Node ids are int32; edge arrays are stored with u < v.
"""

import heapq

import numpy as np
from numba import njit

# Prim heap keys pack (rank, u, v) into one int64.
NODE_BITS = 24
MAX_PACKED_NODES = 1 << NODE_BITS


@njit(cache=True)
def row_similarity(table, u, v):
    m = table.shape[1]
    s = 0
    for c in range(m):
        if table[u, c] == table[v, c]:
            s += 1
    return s


@njit(cache=True)
def pair_similarities(table, us, vs):
    out = np.empty(us.shape[0], np.int16)
    for i in range(us.shape[0]):
        out[i] = row_similarity(table, us[i], vs[i])
    return out


@njit(cache=True)
def complete_graph_edges(table):
    n = table.shape[0]
    count = n * (n - 1) // 2
    us = np.empty(count, np.int32)
    vs = np.empty(count, np.int32)
    ws = np.empty(count, np.int16)
    i = 0
    for u in range(n):
        for v in range(u + 1, n):
            us[i] = u
            vs[i] = v
            ws[i] = row_similarity(table, u, v)
            i += 1
    return us, vs, ws


@njit(cache=True)
def order_by_weight_desc(ws, max_w):
    """Stable counting sort of edge indices by descending weight."""
    counts = np.zeros(max_w + 2, np.int64)
    for i in range(ws.shape[0]):
        counts[max_w - ws[i]] += 1
    starts = np.zeros(max_w + 2, np.int64)
    acc = 0
    for b in range(max_w + 1):
        starts[b] = acc
        acc += counts[b]
    starts[max_w + 1] = acc
    order = np.empty(ws.shape[0], np.int64)
    fill = starts.copy()
    for i in range(ws.shape[0]):
        b = max_w - ws[i]
        order[fill[b]] = i
        fill[b] += 1
    return order, starts


@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def kruskal_select(n, us, vs, ws, max_w):
    order, _ = order_by_weight_desc(ws, max_w)
    parent = np.arange(n)
    size = np.ones(n, np.int64)
    chosen = np.zeros(ws.shape[0], np.bool_)
    joined = 0
    for i in order:
        if joined == n - 1:
            break
        a = _find(parent, us[i])
        b = _find(parent, vs[i])
        if a == b:
            continue
        if size[a] < size[b]:
            a, b = b, a
        parent[b] = a
        size[a] += size[b]
        chosen[i] = True
        joined += 1
    return chosen


@njit(cache=True)
def _bfs_tree(start, adj_head, adj_next, adj_to, dist, queue):
    """BFS over a forest component; dist must be -1 on the component."""
    dist[start] = 0
    queue[0] = start
    lo = 0
    hi = 1
    far = start
    while lo < hi:
        x = queue[lo]
        lo += 1
        if dist[x] > dist[far] or (dist[x] == dist[far] and x < far):
            far = x
        e = adj_head[x]
        while e != -1:
            y = adj_to[e]
            if dist[y] == -1:
                dist[y] = dist[x] + 1
                queue[hi] = y
                hi += 1
            e = adj_next[e]
    return far, hi


@njit(cache=True)
def _diameter_increase(u, v, comp, comp_diam, ecc, delta):
    """Increase of the larger diameter when joining u's and v's trees, or -1
    when the edge can never be taken (same tree, or over delta)."""
    cu = comp[u]
    cv = comp[v]
    if cu == cv:
        return -1
    before = max(comp_diam[cu], comp_diam[cv])
    merged = max(before, ecc[u] + 1 + ecc[v])
    if merged > delta:
        return -1
    return merged - before


@njit(cache=True)
def bounded_diameter_select(n, us, vs, ws, max_w, delta):
    """Greedy diameter-constrained maximum spanning forest.

    Edges are taken in descending weight groups. Inside a group the edge
    whose merge increases the larger of the two tree diameters the least goes
    first, ties by the canonical (u, v) order. Increases can drop as trees
    grow, so a lazy heap is refreshed for every edge touching a merged tree.
    After every merge all eccentricities of the merged tree are recomputed.
    Rejections are final: merged diameters never shrink.
    """
    delta = min(delta, n)
    order, starts = order_by_weight_desc(ws, max_w)
    chosen = np.zeros(ws.shape[0], np.bool_)

    comp = np.arange(n)
    member_head = np.arange(n)
    member_next = np.full(n, -1, np.int64)
    member_tail = np.arange(n)
    comp_size = np.ones(n, np.int64)
    comp_diam = np.zeros(n, np.int64)
    ecc = np.zeros(n, np.int64)

    adj_head = np.full(n, -1, np.int64)
    adj_next = np.full(2 * n, -1, np.int64)
    adj_to = np.zeros(2 * n, np.int64)
    n_adj = 0

    dist_a = np.full(n, -1, np.int64)
    dist_b = np.full(n, -1, np.int64)
    queue = np.zeros(n, np.int64)

    # per-group incidence lists over group positions
    inc_head = np.full(n, -1, np.int64)
    biggest = 0
    for g in range(max_w + 1):
        biggest = max(biggest, starts[g + 1] - starts[g])
    inc_next = np.full(2 * biggest, -1, np.int64)
    key = np.zeros(biggest, np.int64)
    done = np.zeros(biggest, np.bool_)

    for g in range(max_w + 1):
        lo = starts[g]
        size = starts[g + 1] - lo
        if size == 0:
            continue
        heap = [np.int64(0)]
        heap.pop()
        for p in range(size):
            i = order[lo + p]
            u = us[i]
            v = vs[i]
            inc_next[2 * p] = inc_head[u]
            inc_head[u] = 2 * p
            inc_next[2 * p + 1] = inc_head[v]
            inc_head[v] = 2 * p + 1
            k = _diameter_increase(u, v, comp, comp_diam, ecc, delta)
            done[p] = k < 0
            key[p] = k
            if k >= 0:
                heapq.heappush(heap, k * size + p)

        while len(heap) > 0:
            entry = heapq.heappop(heap)
            p = entry % size
            if done[p] or entry // size != key[p]:
                continue
            i = order[lo + p]
            u = us[i]
            v = vs[i]
            k = _diameter_increase(u, v, comp, comp_diam, ecc, delta)
            if k < 0:
                done[p] = True
                continue
            done[p] = True
            chosen[i] = True
            cu = comp[u]
            cv = comp[v]
            adj_to[n_adj] = v
            adj_next[n_adj] = adj_head[u]
            adj_head[u] = n_adj
            n_adj += 1
            adj_to[n_adj] = u
            adj_next[n_adj] = adj_head[v]
            adj_head[v] = n_adj
            n_adj += 1
            # relabel the smaller component into the larger one
            keep, gone = cu, cv
            if comp_size[keep] < comp_size[gone]:
                keep, gone = gone, keep
            x = member_head[gone]
            while x != -1:
                comp[x] = keep
                x = member_next[x]
            member_next[member_tail[keep]] = member_head[gone]
            member_tail[keep] = member_tail[gone]
            comp_size[keep] += comp_size[gone]
            # eccentricity = max distance to the two diameter endpoints
            a, _ = _bfs_tree(u, adj_head, adj_next, adj_to, dist_a, queue)
            x = member_head[keep]
            while x != -1:
                dist_a[x] = -1
                x = member_next[x]
            b, _ = _bfs_tree(a, adj_head, adj_next, adj_to, dist_a, queue)
            _bfs_tree(b, adj_head, adj_next, adj_to, dist_b, queue)
            comp_diam[keep] = dist_a[b]
            x = member_head[keep]
            while x != -1:
                ecc[x] = max(dist_a[x], dist_b[x])
                dist_a[x] = -1
                dist_b[x] = -1
                x = member_next[x]
            # refresh keys of live group edges touching the merged tree,
            # unlinking dead ones so each is walked past at most once
            x = member_head[keep]
            while x != -1:
                prev = -1
                h = inc_head[x]
                while h != -1:
                    q = h >> 1
                    nxt = inc_next[h]
                    if not done[q]:
                        j = order[lo + q]
                        k = _diameter_increase(us[j], vs[j], comp, comp_diam, ecc, delta)
                        if k < 0:
                            done[q] = True
                        elif k != key[q]:
                            key[q] = k
                            heapq.heappush(heap, k * size + q)
                    if done[q]:
                        if prev == -1:
                            inc_head[x] = nxt
                        else:
                            inc_next[prev] = nxt
                    else:
                        prev = h
                    h = nxt
                x = member_next[x]

        for p in range(size):
            i = order[lo + p]
            inc_head[us[i]] = -1
            inc_head[vs[i]] = -1
    return chosen


@njit(cache=True)
def csr_adjacency(n, us, vs):
    deg = np.zeros(n + 1, np.int64)
    for i in range(us.shape[0]):
        deg[us[i] + 1] += 1
        deg[vs[i] + 1] += 1
    for x in range(n):
        deg[x + 1] += deg[x]
    fill = deg[:-1].copy()
    nbr = np.empty(2 * us.shape[0], np.int64)
    eid = np.empty(2 * us.shape[0], np.int64)
    for i in range(us.shape[0]):
        a = us[i]
        b = vs[i]
        nbr[fill[a]] = b
        eid[fill[a]] = i
        fill[a] += 1
        nbr[fill[b]] = a
        eid[fill[b]] = i
        fill[b] += 1
    return deg, nbr, eid


@njit(cache=True)
def prim_select(n, us, vs, ws, v0, rank):
    """Lazy Prim growing from v0; rank[depth_clamped, sim] orders candidates.

    Returns (parent, depth, added); added < n means the graph is disconnected.
    """
    indptr, nbr, eid = csr_adjacency(n, us, vs)
    max_d = rank.shape[0] - 1
    parent = np.full(n, -1, np.int32)
    depth = np.full(n, -1, np.int64)
    in_tree = np.zeros(n, np.bool_)
    in_tree[v0] = True
    depth[v0] = 0
    best = np.full(n, np.iinfo(np.int64).max, np.int64)
    added = 1
    heap = [np.int64(0)]
    heap.pop()
    shift_u = NODE_BITS
    shift_r = 2 * NODE_BITS
    x = v0
    while True:
        d = min(depth[x] + 1, max_d)
        for p in range(indptr[x], indptr[x + 1]):
            y = nbr[p]
            if not in_tree[y]:
                key = (np.int64(rank[d, ws[eid[p]]]) << shift_r) | (np.int64(x) << shift_u) | np.int64(y)
                # only the best pending key per node can ever be popped first
                if key < best[y]:
                    best[y] = key
                    heapq.heappush(heap, key)
        x = -1
        while len(heap) > 0:
            key = heapq.heappop(heap)
            y = key & (MAX_PACKED_NODES - 1)
            if in_tree[y] or key != best[y]:
                continue
            u = (key >> shift_u) & (MAX_PACKED_NODES - 1)
            in_tree[y] = True
            parent[y] = u
            depth[y] = depth[u] + 1
            added += 1
            x = y
            break
        if x == -1:
            break
    return parent, depth, added


@njit(cache=True)
def adfa_dense_defaults(table, depth, order):
    """Best lower-depth default per state; order sorts states by (depth, id)."""
    n = table.shape[0]
    m = table.shape[1]
    target = np.full(n, -1, np.int32)
    best_sim = np.zeros(n, np.int64)
    for u in range(n):
        du = depth[u]
        if du == 0:
            continue
        best = -1
        bs = -1
        for j in range(n):
            v = order[j]
            if depth[v] >= du:
                break
            s = row_similarity(table, u, v)
            if s > bs:
                bs = s
                best = v
                if bs == m:
                    break
        target[u] = best
        best_sim[u] = bs
    return target, best_sim


@njit(cache=True)
def _lookup(offsets, chars, targets, x, c):
    lo = offsets[x]
    hi = offsets[x + 1]
    while lo < hi:
        mid = (lo + hi) // 2
        if chars[mid] < c:
            lo = mid + 1
        else:
            hi = mid
    if lo < offsets[x + 1] and chars[lo] == c:
        return targets[lo]
    return -1


@njit(cache=True)
def resolve_step(offsets, chars, targets, default, x, c, guard):
    """Returns (state, delay); state -1 means unresolvable, -2 loop guard hit."""
    delay = 0
    while True:
        t = _lookup(offsets, chars, targets, x, c)
        if t >= 0:
            return t, delay
        nxt = default[x]
        if nxt < 0:
            return -1, delay
        x = nxt
        delay += 1
        if delay > guard:
            return -2, delay


@njit(cache=True)
def _fill_row(offsets, chars, targets, default, dest, delay, x):
    p = default[x]
    if p < 0:
        dest[x, :] = -1
        delay[x, :] = 0
    else:
        dest[x, :] = dest[p, :]
        delay[x, :] = delay[p, :] + 1
    for q in range(offsets[x], offsets[x + 1]):
        dest[x, chars[q]] = targets[q]
        delay[x, chars[q]] = 0


@njit(cache=True)
def resolve_all(offsets, chars, targets, default, m):
    """Resolved destination and delay for every (state, char).

    Rows are filled parent-first along default chains. States whose chain
    runs into a default cycle fall back to walking each cell.
    """
    n = default.shape[0]
    dest = np.empty((n, m), np.int32)
    delay = np.empty((n, m), np.int32)
    status = np.zeros(n, np.int8)  # 0 new, 1 on current path, 2 filled, 3 cyclic
    path = np.empty(n, np.int64)
    for u in range(n):
        if status[u] != 0:
            continue
        top = 0
        x = u
        while x >= 0 and status[x] == 0:
            status[x] = 1
            path[top] = x
            top += 1
            x = default[x]
        cyclic = x >= 0 and status[x] != 2
        for i in range(top - 1, -1, -1):
            y = path[i]
            if cyclic:
                status[y] = 3
                for c in range(m):
                    t, d = resolve_step(offsets, chars, targets, default, y, c, n)
                    dest[y, c] = t
                    delay[y, c] = d
            else:
                _fill_row(offsets, chars, targets, default, dest, delay, y)
                status[y] = 2
    return dest, delay


@njit(cache=True)
def match_batch(offsets, chars, targets, default, start, flat, bounds):
    """Run every string flat[bounds[i]:bounds[i+1]] from start.

    Returns end states and matching delays; an end state of -1 marks a string
    that hit an unresolvable transition.
    """
    count = bounds.shape[0] - 1
    n = default.shape[0]
    ends = np.empty(count, np.int64)
    delays = np.zeros(count, np.int64)
    for i in range(count):
        x = start
        total = 0
        for p in range(bounds[i], bounds[i + 1]):
            t, d = resolve_step(offsets, chars, targets, default, x, flat[p], n)
            total += d
            if t < 0:
                x = -1
                break
            x = t
        ends[i] = x
        delays[i] = total
    return ends, delays


@njit(cache=True)
def dfa_run_batch(table, start, flat, bounds):
    count = bounds.shape[0] - 1
    ends = np.empty(count, np.int64)
    for i in range(count):
        x = start
        for p in range(bounds[i], bounds[i + 1]):
            x = table[x, flat[p]]
        ends[i] = x
    return ends


MERSENNE_31 = (1 << 31) - 1


@njit(cache=True, inline="always")
def _mod_p31(x):
    # x < 2^62
    x = (x & MERSENNE_31) + (x >> 31)
    x = (x & MERSENNE_31) + (x >> 31)
    return x - MERSENNE_31 if x >= MERSENNE_31 else x


@njit(cache=True)
def multilinear_hashes(columns, chars, keys):
    """Two independent multilinear lanes mod 2^31 - 1 over the successor
    sequence of every state; lanes are packed hi/lo into one uint64.

    ``columns`` is the transposed transition table (alphabet x states).
    """
    n = columns.shape[1]
    k = chars.shape[0]
    a = np.full(n, keys[0, k], np.int64)
    b = np.full(n, keys[1, k], np.int64)
    for j in range(k):
        col = columns[chars[j]]
        ka = keys[0, j]
        kb = keys[1, j]
        for v in range(n):
            x = _mod_p31(np.int64(col[v]))
            a[v] = _mod_p31(a[v] + ka * x)
            b[v] = _mod_p31(b[v] + kb * x)
    out = np.empty(n, np.uint64)
    for v in range(n):
        out[v] = (np.uint64(a[v]) << np.uint64(32)) | np.uint64(b[v])
    return out


@njit(cache=True)
def bucket_partners(h, draw):
    """Group states by equal hash; each state in a bucket of size >= 2 takes
    the member at ``floor(draw[u] * (size - 1))`` among the other members,
    listed by ascending id. Returns parallel arrays (u, partner)."""
    n = h.shape[0]
    cap = 1
    while cap < 2 * n:
        cap *= 2
    slot_key = np.empty(cap, np.uint64)
    slot_id = np.full(cap, -1, np.int64)
    bucket = np.empty(n, np.int64)
    nb = 0
    for v in range(n):
        s = np.int64((h[v] * np.uint64(0x9E3779B97F4A7C15)) >> np.uint64(40)) & (cap - 1)
        while slot_id[s] != -1 and slot_key[s] != h[v]:
            s = (s + 1) & (cap - 1)
        if slot_id[s] == -1:
            slot_id[s] = nb
            slot_key[s] = h[v]
            nb += 1
        bucket[v] = slot_id[s]
    starts = np.zeros(nb + 1, np.int64)
    for v in range(n):
        starts[bucket[v] + 1] += 1
    for b in range(nb):
        starts[b + 1] += starts[b]
    fill = starts[:-1].copy()
    members = np.empty(n, np.int64)
    pos = np.empty(n, np.int64)
    for v in range(n):
        b = bucket[v]
        members[fill[b]] = v
        pos[v] = fill[b]
        fill[b] += 1
    us = np.empty(n, np.int64)
    vs = np.empty(n, np.int64)
    cnt = 0
    for v in range(n):
        b = bucket[v]
        size = starts[b + 1] - starts[b]
        if size < 2:
            continue
        p = starts[b] + np.int64(draw[v] * (size - 1))
        if p >= pos[v]:
            p += 1
        us[cnt] = v
        vs[cnt] = members[p]
        cnt += 1
    return us[:cnt], vs[:cnt]


@njit(cache=True)
def scan_chunk(offsets, chars, targets, default, accept, state, data, base):
    """Feed ``data`` from ``state``. Returns (state, delay, max single-step
    delay, accepting positions offset by ``base``, failure index or -1)."""
    n = default.shape[0]
    hits = np.empty(data.shape[0], np.int64)
    nh = 0
    total = 0
    worst = 0
    x = state
    for i in range(data.shape[0]):
        t, d = resolve_step(offsets, chars, targets, default, x, data[i], n)
        total += d
        if d > worst:
            worst = d
        if t < 0:
            return x, total, worst, hits[:nh], i
        x = t
        if accept[x]:
            hits[nh] = base + i + 1
            nh += 1
    return x, total, worst, hits[:nh], -1
