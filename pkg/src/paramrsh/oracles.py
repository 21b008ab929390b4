"""Exact brute-force references used for success detection and testing.

Every oracle re-verifies its witness before returning and refuses inputs
beyond its size cap instead of approximating.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import InstanceTooLarge
from .graphs import Graph, SpanningTree, is_spanning_tree

VC_VALUE_CAP = 24
VC_WITNESS_CAP = 16
TREE_SEARCH_CAP = 2_000_000
CDS_CAP = 22
HELD_KARP_CAP = 18
SUBMODULAR_CAP = 20
LP_BRUTE_CAP = 10


@dataclass
class OracleResult:
    optimum_value: Any
    witnesses: list | None = None
    search_space_size: int = 0
    info: dict = field(default_factory=dict)

    @property
    def witness(self):
        return self.witnesses[0] if self.witnesses else None


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _is_cover(g: Graph, bits: int) -> bool:
    return all((bits >> u) & 1 or (bits >> v) & 1 for u, v in g.edges)


# ----------------------------------------------------------------------------
# vertex cover


def _min_cover_size(g: Graph) -> int:
    """Branch on an uncovered edge: one of its endpoints must be chosen."""
    best = g.n
    edges = g.edges

    def rec(chosen: int, size: int):
        nonlocal best
        if size >= best:
            return
        for u, v in edges:
            if not ((chosen >> u) & 1 or (chosen >> v) & 1):
                rec(chosen | (1 << u), size + 1)
                rec(chosen | (1 << v), size + 1)
                return
        best = size

    rec(0, 0)
    return best


def brute_min_vertex_cover(g: Graph, *, witnesses: bool | None = None) -> OracleResult:
    """Minimum vertex cover size; all minimum covers (as bitmasks) when n <= 16."""
    if g.n > VC_VALUE_CAP:
        raise InstanceTooLarge(f"vertex cover oracle supports n <= {VC_VALUE_CAP}, got {g.n}")
    opt = _min_cover_size(g)
    want = g.n <= VC_WITNESS_CAP if witnesses is None else witnesses
    found = None
    if want:
        if g.n > VC_WITNESS_CAP:
            raise InstanceTooLarge(f"cover enumeration supports n <= {VC_WITNESS_CAP}")
        found = []
        for combo in itertools.combinations(range(g.n), opt):
            bits = sum(1 << v for v in combo)
            if _is_cover(g, bits):
                found.append(bits)
        if not found:
            raise AssertionError("no cover of the computed optimum size")
    return OracleResult(opt, found, 2**g.n)


# ----------------------------------------------------------------------------
# LP relaxation of vertex cover


def brute_lp_half_integral(g: Graph, x: int = 0) -> OracleResult:
    """Optimum of the vertex cover LP on G(x) over assignments in {0, 1/2, 1}^n.

    Edges covered by ``x`` are dropped.  Witnesses are all optimal
    assignments, each a tuple of Fractions.
    """
    n = g.n
    if n > LP_BRUTE_CAP:
        raise InstanceTooLarge(f"half-integral enumeration supports n <= {LP_BRUTE_CAP}")
    live = [(u, v) for u, v in g.edges if not ((x >> u) & 1 or (x >> v) & 1)]
    # doubled values: 0, 1, 2 stand for 0, 1/2, 1
    grid = np.array(list(itertools.product((0, 1, 2), repeat=n)), dtype=np.int64).reshape(-1, n)
    ok = np.ones(len(grid), dtype=bool)
    for u, v in live:
        ok &= grid[:, u] + grid[:, v] >= 2
    totals = grid.sum(axis=1)
    best2 = int(totals[ok].min())
    opt_rows = grid[ok & (totals == best2)]
    wit = [tuple(Fraction(int(a), 2) for a in row) for row in opt_rows]
    return OracleResult(Fraction(best2, 2), wit, 3**n)


# ----------------------------------------------------------------------------
# maximum-leaf spanning tree


def _bridges(g: Graph) -> set[int]:
    """Edge ids whose removal disconnects g (iterative low-link DFS)."""
    n = g.n
    disc = [-1] * n
    low = [0] * n
    out: set[int] = set()
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, iter(zip(g.neighbors[root], g.incident[root])))]
        while stack:
            v, via, it = stack[-1]
            advanced = False
            for w, eid in it:
                if eid == via:
                    continue
                if disc[w] == -1:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, eid, iter(zip(g.neighbors[w], g.incident[w]))))
                    advanced = True
                    break
                low[v] = min(low[v], disc[w])
            if not advanced:
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    low[parent] = min(low[parent], low[v])
                    if low[v] > disc[parent]:
                        out.add(via)
    return out


def _tree_search_space(g: Graph) -> tuple[list[int], list[int], int]:
    bridges = sorted(_bridges(g))
    free = [e for e in range(g.m) if e not in set(bridges)]
    need = g.n - 1 - len(bridges)
    return bridges, free, math.comb(len(free), need)


def _max_leaf_by_trees(g: Graph) -> OracleResult:
    bridges, free, space = _tree_search_space(g)
    need = g.n - 1 - len(bridges)
    n = g.n
    base_deg = [0] * n
    for e in bridges:
        u, v = g.edges[e]
        base_deg[u] += 1
        base_deg[v] += 1
    best = -1
    best_edges = None
    count = 0
    for combo in itertools.combinations(free, need):
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        ok = True
        for e in itertools.chain(bridges, combo):
            u, v = g.edges[e]
            ru, rv = find(u), find(v)
            if ru == rv:
                ok = False
                break
            parent[ru] = rv
        if not ok:
            continue
        count += 1
        deg = base_deg[:]
        for e in combo:
            u, v = g.edges[e]
            deg[u] += 1
            deg[v] += 1
        leaves = sum(1 for d in deg if d == 1)
        if leaves > best:
            best = leaves
            best_edges = tuple(sorted(itertools.chain(bridges, combo)))
    tree = SpanningTree.from_edges(g, best_edges)
    if tree.leaves != best:
        raise AssertionError("max-leaf witness does not re-verify")
    return OracleResult(best, [tree], space, {"method": "trees", "spanning_trees": count})


def min_connected_dominating_set(g: Graph) -> int:
    """Size of a minimum connected dominating set (n >= 2)."""
    n = g.n
    full = (1 << n) - 1
    closed = [g.nbr_mask[v] | (1 << v) for v in range(n)]
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            dom = 0
            for v in combo:
                dom |= closed[v]
            if dom != full:
                continue
            members = sum(1 << v for v in combo)
            seen = 1 << combo[0]
            frontier = seen
            while frontier:
                nxt = 0
                f = frontier
                while f:
                    low = f & -f
                    nxt |= g.nbr_mask[low.bit_length() - 1]
                    f ^= low
                nxt &= members & ~seen
                seen |= nxt
                frontier = nxt
            if seen == members:
                return size
    return n


def _max_leaf_by_cds(g: Graph) -> OracleResult:
    if g.n <= 2:
        # the identity n - cds fails here: both vertices of an edge are leaves
        return OracleResult(g.n if g.n == 2 else 0, None, 2**g.n, {"method": "cds"})
    value = g.n - min_connected_dominating_set(g)
    return OracleResult(value, None, 2**g.n, {"method": "cds"})


def brute_max_leaf_tree(g: Graph, *, method: str = "auto") -> OracleResult:
    """Maximum leaf count over all spanning trees of g.

    ``method="trees"`` enumerates spanning trees (bridges are forced in, the
    rest chosen among the non-bridge edges) and returns an optimal tree as
    witness.  ``method="cds"`` uses max leaves = n - (minimum connected
    dominating set size), valid for n >= 3.  ``auto`` prefers trees and
    falls back to the dominating-set route when the tree search is too big.
    """
    if not g.is_connected():
        raise ValueError("graph must be connected")
    if method not in ("auto", "trees", "cds"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "trees"):
        _, _, space = _tree_search_space(g)
        if space <= TREE_SEARCH_CAP:
            return _max_leaf_by_trees(g)
        if method == "trees":
            raise InstanceTooLarge(f"spanning-tree search space {space} exceeds {TREE_SEARCH_CAP}")
    if g.n > CDS_CAP:
        raise InstanceTooLarge(f"dominating-set search supports n <= {CDS_CAP}, got {g.n}")
    return _max_leaf_by_cds(g)


def all_spanning_trees(g: Graph) -> list[SpanningTree]:
    """Every spanning tree of g (small graphs only)."""
    bridges, free, space = _tree_search_space(g)
    if space > TREE_SEARCH_CAP:
        raise InstanceTooLarge(f"spanning-tree search space {space} exceeds {TREE_SEARCH_CAP}")
    need = g.n - 1 - len(bridges)
    out = []
    for combo in itertools.combinations(free, need):
        mask = np.zeros(g.m, dtype=bool)
        mask[list(bridges)] = True
        mask[list(combo)] = True
        if is_spanning_tree(g, mask):
            out.append(SpanningTree(g, mask, check=False))
    return out


# ----------------------------------------------------------------------------
# TSP


def _distance_matrix(ps) -> np.ndarray:
    d = getattr(ps, "dist", ps)
    return np.asarray(d, dtype=float)


def held_karp(ps) -> OracleResult:
    """Optimal closed tour by the subset DP; accepts a PointSet or distance matrix."""
    d = _distance_matrix(ps)
    n = d.shape[0]
    if n > HELD_KARP_CAP:
        raise InstanceTooLarge(f"Held-Karp supports n <= {HELD_KARP_CAP}, got {n}")
    if n == 1:
        return OracleResult(0.0, [(0,)], 1)
    if n == 2:
        return OracleResult(2 * d[0, 1], [(0, 1)], 1)
    k = n - 1  # cities 1..n-1 carry bits 0..k-1
    full = 1 << k
    dp = np.full((full, k), np.inf)
    par = np.full((full, k), -1, dtype=np.int64)
    for j in range(k):
        dp[1 << j, j] = d[0, j + 1]
    dk = d[1:, 1:]
    masks = np.arange(full, dtype=np.int64)
    sizes = np.array([_popcount(int(m)) for m in range(full)])
    for s in range(2, k + 1):
        layer = masks[sizes == s]
        for j in range(k):
            sel = layer[(layer >> j) & 1 == 1]
            prev = sel ^ (1 << j)
            cand = dp[prev] + dk[:, j][None, :]
            cand[:, j] = np.inf
            arg = np.argmin(cand, axis=1)
            dp[sel, j] = cand[np.arange(len(sel)), arg]
            par[sel, j] = arg
    closing = dp[full - 1] + d[1:, 0]
    last = int(np.argmin(closing))
    best = float(closing[last])
    order = []
    mask = full - 1
    j = last
    while j != -1:
        order.append(j + 1)
        pj = int(par[mask, j])
        mask ^= 1 << j
        j = pj
    tour = (0,) + tuple(reversed(order))
    if sorted(tour) != list(range(n)):
        raise AssertionError("Held-Karp witness is not a permutation")
    check = sum(d[tour[i], tour[(i + 1) % n]] for i in range(n))
    if abs(check - best) > 1e-9 * max(1.0, best):
        raise AssertionError("Held-Karp witness cost does not re-verify")
    return OracleResult(best, [tour], math.factorial(n - 1) // 2)


def brute_tsp(ps) -> OracleResult:
    """Minimum over all (n-1)!/2 tours by plain enumeration (n <= 10)."""
    d = _distance_matrix(ps)
    n = d.shape[0]
    if n > 10:
        raise InstanceTooLarge("tour enumeration supports n <= 10")
    if n <= 2:
        return held_karp(d)
    best = math.inf
    arg = None
    for rest in itertools.permutations(range(1, n)):
        if rest[0] > rest[-1]:
            continue  # skip the mirror image
        tour = (0,) + rest
        c = sum(d[tour[i], tour[(i + 1) % n]] for i in range(n))
        if c < best:
            best, arg = c, tour
    return OracleResult(float(best), [arg], math.factorial(n - 1) // 2)


# ----------------------------------------------------------------------------
# submodular maximisation


def brute_submodular_opt(f, matroids) -> OracleResult:
    """Maximum of f over sets independent in every matroid (bitmask witnesses).

    Depth-first over elements; independence is closed under subsets, so a
    dependent prefix prunes its whole subtree.
    """
    n = f.ground_size
    if n > SUBMODULAR_CAP:
        raise InstanceTooLarge(f"submodular oracle supports n <= {SUBMODULAR_CAP}, got {n}")
    best = -math.inf
    best_sets: list[int] = []
    visited = 0

    def independent(mask: int) -> bool:
        size = _popcount(mask)
        return all(mt.rank(mask) == size for mt in matroids)

    stack = [(0, 0)]
    while stack:
        mask, nxt = stack.pop()
        visited += 1
        val = f.value(mask)
        if val > best + 1e-9:
            best, best_sets = val, [mask]
        elif abs(val - best) <= 1e-9:
            best_sets.append(mask)
        for i in range(nxt, n):
            child = mask | (1 << i)
            if independent(child):
                stack.append((child, i + 1))
    for w in best_sets:
        if not independent(w) or abs(f.value(w) - best) > 1e-9:
            raise AssertionError("submodular witness does not re-verify")
    return OracleResult(best, sorted(best_sets), visited)
