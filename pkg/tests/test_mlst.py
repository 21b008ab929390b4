from collections import Counter
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paramrsh.engine import Budget, RngStream
from paramrsh.graphs import (
    Graph,
    SpanningTree,
    bfs_tree,
    fundamental_cycle,
    gen_complete,
    gen_cycle,
    gen_gloc,
    gen_path,
    gen_star,
    is_spanning_tree,
    leaf_count,
    random_connected_graph,
    random_spanning_tree,
)
from paramrsh.mlst import (
    MlstState,
    edge_exchange,
    generic_accept,
    generic_mutation,
    run_mlst,
    tree_mutation,
)
from paramrsh.oracles import all_spanning_trees, brute_max_leaf_tree

from .conftest import graph_from_networkx


def _graph_with_50_edges():
    edges = [(a, b) for a in range(10) for b in range(a + 1, 10)]
    edges += [(9, 10), (10, 11), (11, 12), (12, 13), (13, 14)]
    return Graph(15, edges)


def test_generic_mutation_flip_statistics():
    g = _graph_with_50_edges()
    assert g.m == 50
    t = bfs_tree(g)
    r = RngStream(21, 0)
    draws = 100_000
    changes = np.array([np.count_nonzero(generic_mutation(t, g, r) ^ t.mask) for _ in range(draws)])
    assert abs(changes.mean() - 1.0) < 0.05
    assert abs((changes == 0).mean() - (1 - 1 / 50) ** 50) < 0.01


def test_generic_mutation_without_flips_keeps_edges():
    g = gen_cycle(5)
    t = bfs_tree(g)
    r = RngStream(22, 0)
    for _ in range(200):
        off = generic_mutation(t, g, r)
        if not np.any(off ^ t.mask):
            assert np.array_equal(off, t.mask)
            return
    pytest.fail("no zero-flip offspring in 200 draws")


def test_generic_accept_equal_and_disconnected():
    g = gen_cycle(5)
    cur = MlstState.of(bfs_tree(g))
    assert generic_accept(cur, cur.tree.mask).tree == cur.tree
    broken = cur.tree.mask.copy()
    broken[np.flatnonzero(broken)[0]] = False
    assert generic_accept(cur, broken) is cur


@given(st.integers(0, 10**6))
def test_generic_accept_matches_networkx_check(seed):
    r = RngStream(seed, 3)
    g = random_connected_graph(6, 0.5, r)
    cur = MlstState.of(random_spanning_tree(g, r))
    for _ in range(20):
        off = generic_mutation(cur.tree, g, r)
        chosen = [g.edges[e] for e in np.flatnonzero(off)]
        h = nx.Graph()
        h.add_nodes_from(range(g.n))
        h.add_edges_from(chosen)
        is_tree = nx.is_tree(h)
        leaves = sum(1 for _, d in h.degree() if d == 1)
        expect_accept = is_tree and leaves >= cur.leaves
        nxt = generic_accept(cur, off)
        assert (nxt is not cur) == expect_accept
        cur = nxt


def test_tree_mutation_on_tree_graph_is_identity():
    g = gen_path(6)
    t = bfs_tree(g)
    r = RngStream(23, 0)
    for _ in range(50):
        assert tree_mutation(t, g, r) == t


def _exchange_distribution(t):
    """Exact outcome distribution of one exchange: uniform non-tree edge, uniform cycle edge."""
    g = t.graph
    outside = [e for e in range(g.m) if not t.mask[e]]
    dist = Counter()
    for e in outside:
        cyc = fundamental_cycle(t, e)
        for f in cyc:
            mask = t.mask.copy()
            mask[e] = True
            mask[f] = False
            dist[SpanningTree(g, mask).key()] += Fraction(1, len(outside) * len(cyc))
    return dist


@pytest.mark.parametrize("graph", [gen_cycle(4), gen_complete(4)], ids=["C4", "K4"])
def test_single_exchange_distribution(graph):
    t = bfs_tree(graph)
    exact = _exchange_distribution(t)
    r = RngStream(24, 0)
    draws = 100_000
    seen = Counter(edge_exchange(t, graph, r).key() for _ in range(draws))
    assert set(seen) == set(exact)
    for key, p in exact.items():
        assert abs(seen[key] / draws - float(p)) < 0.01


@pytest.mark.slow
def test_tree_mutation_closure_million():
    r = RngStream(25, 0)
    done = 0
    while done < 1_000_000:
        g = random_connected_graph(5 + r.randbelow(16), 0.3, r)
        t = bfs_tree(g)
        for _ in range(20_000):
            t = tree_mutation(t, g, r)
            assert is_spanning_tree(g, t.mask)
        done += 20_000


def test_run_mlst_star_trivial():
    g = gen_star(5)
    traj = run_mlst(g, "tree_based", Budget(10), RngStream(1, 0))
    assert traj.success and traj.hit_time == 1


def test_run_mlst_gloc_3_9_tree_based():
    inst = gen_gloc(3, 9)
    opt = brute_max_leaf_tree(inst.graph).optimum_value
    wins = sum(run_mlst(inst.graph, "tree_based", Budget(10**6), RngStream(7, s), target=opt).success
               for s in range(100))
    assert wins >= 90


@pytest.mark.parametrize("variant", ["generic", "tree_based"])
def test_backends_identical(variant):
    inst = gen_gloc(3, 9)
    for s in range(5):
        a = run_mlst(inst.graph, variant, Budget(3000), RngStream(3, s), target=6)
        b = run_mlst(inst.graph, variant, Budget(3000), RngStream(3, s), target=6, backend="python")
        assert a.signature() == b.signature()


@pytest.mark.parametrize("variant", ["generic", "tree_based"])
def test_leaf_count_never_decreases(variant):
    g = random_connected_graph(9, 0.4, RngStream(4, 4))
    seen = []
    run_mlst(g, variant, Budget(3000), RngStream(4, 5), target=g.n, backend="python",
             trace=lambda ev, st: seen.append(st.leaves))
    assert seen and all(a <= b for a, b in zip(seen, seen[1:]))


def test_run_is_replayable():
    g = gen_gloc(4, 16).graph
    a = run_mlst(g, "tree_based", Budget(20_000), RngStream(9, 1))
    b = run_mlst(g, "tree_based", Budget(20_000), RngStream(9, 1))
    assert a.signature() == b.signature()


def test_history_respects_budget_offset():
    g = gen_gloc(3, 9).graph
    budget = Budget(500)
    budget.charge(100)
    traj = run_mlst(g, "generic", budget, RngStream(2, 2), target=99)
    assert traj.history[0][0] > 100 and budget.evaluations_used == 500


@pytest.mark.parametrize("r", [3, 4])
def test_escape_from_lopt_needs_many_changes(r):
    inst = gen_gloc(r, 2 * r + 4)
    base = leaf_count(inst.t_lopt)
    near = [t for t in all_spanning_trees(inst.graph)
            if 0 < np.count_nonzero(t.mask ^ inst.t_lopt.mask) < 2 * (r - 2)]
    assert all(leaf_count(t) <= base for t in near)
    if r == 4:
        assert near  # single exchanges exist and none helps


def test_edge_and_degree_bounds_small_atlas():
    from networkx.generators.atlas import graph_atlas_g

    checked = 0
    for h in graph_atlas_g():
        if h.number_of_nodes() < 3 or h.number_of_nodes() > 6 or not nx.is_connected(h):
            continue
        g = graph_from_networkx(h)
        k = brute_max_leaf_tree(g).optimum_value
        assert g.m <= g.n + 5 * k * k - 7 * k
        assert sum(1 for d in g.degrees if d >= 3) <= 10 * k - 14
        checked += 1
    assert checked == 2 + 6 + 21 + 112
