import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from d2fa_compress import (ALGORITHMS, AlgoSpec, Dfa, LshParams, bfs_depths, build_from_forest,
                           build_srg, build_ssrg, compress, generate_clustered_dfa, kruskal_mst,
                           longest_delay, match_string, verify_equivalent, write_d2fa)
from d2fa_compress.forest import central_node, prim_penalized
from d2fa_compress.graphs import GraphTooLarge
from d2fa_compress.pipelines import (compress_adfa, compress_adfa_sparse, compress_cut, compress_orig,
                                     compress_refined)

import oracles as O


def defaults(d):
    return {u: d.default_of(u) for u in range(d.state_count) if d.default_of(u) is not None}


def savings_identities(dfa, d, r):
    n, m = dfa.table.shape
    tbl = dfa.table.tolist()
    sims = [O.sim(tbl, u, v) for u, v in defaults(d).items()]
    assert r.labeled_before == n * m
    assert r.labeled_after == n * m - sum(sims)
    assert r.labeled_before - r.total_after == sum(s - 1 for s in sims)
    assert r.total_after == r.labeled_after + r.default_count


@st.composite
def small_dfas(draw):
    n = draw(st.integers(1, 40))
    m = draw(st.integers(1, 24))
    c = draw(st.integers(1, n))
    return generate_clustered_dfa(n, m, c, draw(st.floats(0, 1)), draw(st.integers(0, 10_000)))


@given(small_dfas(), st.sampled_from(ALGORITHMS), st.integers(1, 3), st.integers(0, 99))
@settings(max_examples=160, deadline=None)
def test_every_pipeline_is_equivalent_and_accounted(dfa, algo, L, seed):
    spec = AlgoSpec(algo, L=L, lsh=LshParams(k=4, r=8, seed=seed))
    d, r = compress(dfa, spec)
    assert verify_equivalent(dfa, d)
    savings_identities(dfa, d, r)
    assert r.algorithm == algo and r.longest_delay == longest_delay(d)
    if spec.family in ("refined", "cut"):
        assert r.longest_delay <= L
    if spec.family == "adfa":
        depth = bfs_depths(dfa)
        assert all(depth[v] < depth[u] for u, v in defaults(d).items())
        assert dfa.start not in defaults(d)


def test_t1_orig(t1):
    d, r = compress_orig(t1)
    assert (r.labeled_after, r.default_count, r.total_after) == (4, 3, 7)
    assert r.compression_ratio == 7 / 8
    assert r.srg_edge_count == 6


def test_three_rule_savings(three_rules):
    n = three_rules.state_count
    g = build_srg(three_rules)
    d, r = compress_orig(three_rules)
    best = O.max_spanning_forest_weight(n, g.edges())
    assert r.labeled_before - r.total_after == best - (n - 1)
    assert r.total_after == 20


def test_sparse_matches_dense_when_ssrg_holds_the_tree(t1):
    # a single zero-noise cluster: r = n rounds always sample the tree
    for seed in range(10):
        for n in (8, 16, 40, 64):
            dfa = generate_clustered_dfa(n, 32, 1, 0.0, seed)
            lsh = LshParams(r=n, seed=seed)
            assert compress_orig(dfa, True, lsh)[1].total_after == compress_orig(dfa)[1].total_after
    assert compress_orig(t1, True, LshParams(r=4))[1].total_after == 7


@given(st.integers(2, 64), st.integers(0, 999))
@settings(max_examples=40, deadline=None)
def test_sparse_equal_to_dense_whenever_tree_sampled(n, seed):
    dfa = generate_clustered_dfa(n, 32, max(1, n // 8), 0.05, seed)
    lsh = LshParams(r=4 * n, seed=seed)
    dense = compress_orig(dfa)[1].total_after
    sparse = compress_orig(dfa, True, lsh)[1].total_after
    # a spanning forest over a subgraph cannot save more
    assert sparse >= dense
    sampled = build_ssrg(dfa, lsh).weight_map()
    tree = kruskal_mst(build_srg(dfa))
    if all((min(c, p), max(c, p)) in sampled for c, p in tree.edges()):
        assert sparse == dense


def test_refined_t1(t1):
    d, r = compress_refined(t1, L=1)
    assert defaults(d) == {1: 0, 2: 0, 3: 0}
    assert r.longest_delay <= 1 and r.total_after == 7


@pytest.mark.parametrize("seed", range(4))
def test_refined_slack_equals_orig(seed):
    dfa = generate_clustered_dfa(60, 16, 6, 0.2, seed)
    assert compress_refined(dfa, L=60)[1].total_after == compress_orig(dfa)[1].total_after


def _chain_dfa(n, m):
    # consecutive states agree on alternating halves of the alphabet and
    # nothing else, so the similarity graph is a weighted path
    half = m // 2
    table = np.zeros((n, m), dtype=np.int64)
    for i in range(n):
        table[i, :half] = i // 2
        table[i, half:] = n - 1 - (i + 1) // 2
    return Dfa(table, 0, frozenset())


def test_chain_dfa_is_a_path():
    dfa = _chain_dfa(7, 16)
    w = {e: s for e, s in build_srg(dfa).weight_map().items() if s}
    assert w == {(i, i + 1): 8 for i in range(6)}


def test_cut_on_path_tree():
    dfa = _chain_dfa(7, 16)
    g = build_srg(dfa)
    tree = prim_penalized(g, central_node(kruskal_mst(g), 0))
    assert sorted(tree.depth.tolist()) == [0, 1, 1, 2, 2, 3, 3]
    d, r = compress_cut(dfa, L=1, sparse=False)
    assert r.longest_delay <= 1
    kept = len(defaults(d))
    assert kept < 6
    assert verify_equivalent(dfa, d)


@pytest.mark.parametrize("make", ["chain", "clustered"])
def test_cut_forfeits_sim_minus_one_per_edge(make):
    dfa = _chain_dfa(9, 16) if make == "chain" else generate_clustered_dfa(80, 32, 5, 0.1, 3)
    n = dfa.state_count
    g = build_srg(dfa)
    tree = prim_penalized(g, central_node(kruskal_mst(g), 0))
    uncut = build_from_forest(dfa, tree.forest)
    d, r = compress_cut(dfa, L=1, sparse=False)
    kept = {(min(u, v), max(u, v)) for u, v in defaults(d).items()}
    whole = {(min(u, v), max(u, v)) for u, v in tree.forest.edges()}
    assert kept <= whole
    tbl = dfa.table.tolist()
    lost = sum(O.sim(tbl, u, v) - 1 for u, v in whole - kept)
    assert r.total_after - (uncut.labeled_count + uncut.default_count) == lost
    # L large: nothing cut
    _, loose = compress_cut(dfa, L=n, sparse=False)
    assert loose.total_after == uncut.labeled_count + uncut.default_count


def test_cut_sparse_default():
    dfa = generate_clustered_dfa(50, 16, 5, 0.1, 0)
    _, r = compress_cut(dfa)
    assert r.algorithm == "cut-sp"


def test_adfa_t1(t1):
    d, r = compress_adfa(t1)
    assert defaults(d) == {3: 0}
    assert r.total_after == 8 - 2 + 1


@pytest.mark.parametrize("seed", range(3))
def test_adfa_matching_delay_bound(seed):
    dfa = generate_clustered_dfa(120, 8, 6, 0.3, seed)
    rng = np.random.default_rng(seed)
    for d, _ in (compress_adfa(dfa), compress_adfa_sparse(dfa, LshParams(k=2, r=32, seed=seed))):
        for _ in range(300):
            s = rng.integers(0, 8, size=int(rng.integers(0, 25))).tolist()
            assert match_string(d, s).matching_delay <= len(s)


def test_adfa_sparse_zero_rounds():
    d, r = compress_adfa_sparse(generate_clustered_dfa(30, 8, 3, 0.1, 0), LshParams(r=0))
    assert r.default_count == 0 and r.total_after == 240


def test_adfa_sparse_saturates_to_dense(t1):
    for seed in range(5):
        d, _ = compress_adfa_sparse(t1, LshParams(r=4, seed=seed))
        assert defaults(d) == {3: 0}


@given(st.integers(2, 120), st.integers(0, 999))
@settings(max_examples=25, deadline=None)
def test_adfa_sparse_monotone_in_rounds(n, seed):
    dfa = generate_clustered_dfa(n, 16, max(1, n // 10), 0.1, seed)
    totals = [compress_adfa_sparse(dfa, LshParams(k=3, r=r, seed=seed))[1].total_after
              for r in (0, 1, 2, 4, 8, 16, 32)]
    assert all(a >= b for a, b in zip(totals, totals[1:]))
    # each state's sparse default is no better than its dense choice
    assert totals[-1] >= compress_adfa(dfa)[1].total_after


def test_phase_timings_sum_to_total():
    dfa = generate_clustered_dfa(400, 64, 8, 0.05, 0)
    for algo in ALGORITHMS:
        _, r = compress(dfa, AlgoSpec(algo, lsh=LshParams(r=16)))
        phases = {k: v for k, v in r.elapsed_ms.items() if k != "total"}
        assert set(phases) == {"graph", "forest", "build"}
        assert abs(sum(phases.values()) - r.elapsed_ms["total"]) <= 0.05 * r.elapsed_ms["total"]


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_deterministic_output(tmp_path, algo):
    dfa = generate_clustered_dfa(300, 32, 6, 0.1, 8)
    spec = AlgoSpec(algo, lsh=LshParams(k=4, r=24, seed=5))
    write_d2fa(compress(dfa, spec)[0], tmp_path / "a")
    write_d2fa(compress(dfa, spec)[0], tmp_path / "b")
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_algo_spec_validation():
    with pytest.raises(ValueError, match="unknown algorithm"):
        AlgoSpec("fast")
    with pytest.raises(ValueError):
        AlgoSpec("cut", L=0)
    assert AlgoSpec("cut-sp").params() == {"L": 2, "k": 8, "r": 512, "seed": 0}
    assert AlgoSpec("adfa").params() == {}


def test_dense_cap():
    dfa = generate_clustered_dfa(40, 4, 2, 0.0, 0)
    with pytest.raises(GraphTooLarge):
        compress(dfa, AlgoSpec("orig"), dense_cap=10)
    # sparse variants ignore the cap
    compress(dfa, AlgoSpec("orig-sp", lsh=LshParams(r=2)), dense_cap=10)


def test_single_state():
    dfa = generate_clustered_dfa(1, 3, 1, 0.0, 0)
    for algo in ALGORITHMS:
        d, r = compress(dfa, AlgoSpec(algo))
        assert r.total_after == 3 and r.default_count == 0
