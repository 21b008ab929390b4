"""Maximum-leaf spanning tree: Generic (1+1) EA and Tree-Based (1+1) EA.

Both searches accept an offspring only if it is a spanning tree with at least
as many leaves as the current one.  The inner loops run compiled; the Python
operators below call the same kernels so single steps can be inspected and
tested in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from . import _rng
from .engine import Budget, RngStream, Trajectory
from .graphs import Graph, SpanningTree, is_spanning_tree, random_spanning_tree, bfs_tree

VARIANTS = ("generic", "tree_based")


@dataclass(frozen=True)
class MlstState:
    tree: SpanningTree
    leaves: int

    @classmethod
    def of(cls, tree: SpanningTree) -> "MlstState":
        return cls(tree, tree.leaves)


# ----------------------------------------------------------------------------
# kernels


@nb.njit(cache=True)
def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@nb.njit(cache=True)
def _tree_leaves(n, eu, ev, mask, parent, deg):
    """Leaf count if ``mask`` is a spanning tree, else -1.  Fills ``deg``."""
    cnt = 0
    for e in range(mask.shape[0]):
        if mask[e]:
            cnt += 1
    if cnt != n - 1:
        return -1
    for v in range(n):
        parent[v] = v
        deg[v] = 0
    for e in range(mask.shape[0]):
        if mask[e]:
            a = _find(parent, eu[e])
            b = _find(parent, ev[e])
            if a == b:
                return -1
            parent[a] = b
            deg[eu[e]] += 1
            deg[ev[e]] += 1
    leaves = 0
    for v in range(n):
        if deg[v] == 1:
            leaves += 1
    return leaves


@nb.njit(cache=True)
def _count_leaves(deg):
    leaves = 0
    for v in range(deg.shape[0]):
        if deg[v] == 1:
            leaves += 1
    return leaves


@nb.njit(cache=True)
def _exchange(state, n, eu, ev, adj_ptr, adj_nbr, adj_eid, mask, deg, via, stamp, queue, cyc):
    """One random edge exchange applied to ``mask``/``deg`` in place.

    Picks a uniform non-tree edge e, then deletes a uniform edge of the cycle
    closed by e (possibly e itself).  Returns the cycle length, or 0 when
    the tree already uses every edge.
    """
    m = mask.shape[0]
    free = m - (n - 1)
    if free <= 0:
        return 0
    j = _rng.randbelow(state, free)
    e = -1
    for i in range(m):
        if not mask[i]:
            if j == 0:
                e = i
                break
            j -= 1
    u = eu[e]
    v = ev[e]
    # BFS over tree edges from u; stamp[] marks visited, via[] entering edge
    stamp[0] += 1
    mark = stamp[0]
    head = 0
    tail = 0
    queue[tail] = u
    tail += 1
    stamp[u + 1] = mark
    via[u] = -1
    while head < tail:
        a = queue[head]
        head += 1
        if a == v:
            break
        for p in range(adj_ptr[a], adj_ptr[a + 1]):
            eid = adj_eid[p]
            if not mask[eid]:
                continue
            b = adj_nbr[p]
            if stamp[b + 1] != mark:
                stamp[b + 1] = mark
                via[b] = eid
                queue[tail] = b
                tail += 1
    length = 0
    cyc[length] = e
    length += 1
    cur = v
    while cur != u:
        eid = via[cur]
        cyc[length] = eid
        length += 1
        cur = eu[eid] if ev[eid] == cur else ev[eid]
    drop = cyc[_rng.randbelow(state, length)]
    if drop != e:
        mask[e] = True
        mask[drop] = False
        deg[eu[e]] += 1
        deg[ev[e]] += 1
        deg[eu[drop]] -= 1
        deg[ev[drop]] -= 1
    return length


@nb.njit(cache=True)
def _tree_mutation(state, n, eu, ev, adj_ptr, adj_nbr, adj_eid, mask, deg, via, stamp, queue, cyc):
    s = _rng.poisson1(state)
    for _ in range(s):
        if _exchange(state, n, eu, ev, adj_ptr, adj_nbr, adj_eid, mask, deg,
                     via, stamp, queue, cyc) == 0:
            break
    return s


@nb.njit(cache=True)
def _run_generic(state, n, eu, ev, mask, target, max_evals, hist_idx, hist_val):
    m = mask.shape[0]
    parent = np.empty(n, dtype=np.int64)
    deg = np.empty(n, dtype=np.int64)
    flips = np.empty(m, dtype=np.int64)
    leaves = _tree_leaves(n, eu, ev, mask, parent, deg)
    used = 1
    nhist = 1
    hist_idx[0] = used
    hist_val[0] = leaves
    if leaves >= target:
        return used, used, nhist
    p = 1.0 / m
    while used < max_evals:
        cnt = _rng.flip_positions(state, m, p, flips)
        used += 1
        if cnt == 0:
            continue  # offspring equals parent: accepted, nothing changes
        for i in range(cnt):
            mask[flips[i]] = not mask[flips[i]]
        new = _tree_leaves(n, eu, ev, mask, parent, deg)
        if new >= leaves:
            if new > leaves:
                hist_idx[nhist] = used
                hist_val[nhist] = new
                nhist += 1
            leaves = new
            if leaves >= target:
                return used, used, nhist
        else:
            for i in range(cnt):
                mask[flips[i]] = not mask[flips[i]]
    return used, -1, nhist


@nb.njit(cache=True)
def _run_tree_based(state, n, eu, ev, adj_ptr, adj_nbr, adj_eid, mask, target, max_evals,
                    hist_idx, hist_val):
    m = mask.shape[0]
    deg = np.zeros(n, dtype=np.int64)
    for e in range(m):
        if mask[e]:
            deg[eu[e]] += 1
            deg[ev[e]] += 1
    off = mask.copy()
    offdeg = deg.copy()
    via = np.empty(n, dtype=np.int64)
    stamp = np.zeros(n + 1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    cyc = np.empty(n + 1, dtype=np.int64)
    leaves = _count_leaves(deg)
    used = 1
    nhist = 1
    hist_idx[0] = used
    hist_val[0] = leaves
    if leaves >= target:
        return used, used, nhist
    while used < max_evals:
        used += 1
        s = _tree_mutation(state, n, eu, ev, adj_ptr, adj_nbr, adj_eid, off, offdeg,
                           via, stamp, queue, cyc)
        if s == 0:
            continue
        new = _count_leaves(offdeg)
        if new >= leaves:
            mask[:] = off
            deg[:] = offdeg
            if new > leaves:
                hist_idx[nhist] = used
                hist_val[nhist] = new
                nhist += 1
                leaves = new
                if leaves >= target:
                    return used, used, nhist
        else:
            off[:] = mask
            offdeg[:] = deg
    return used, -1, nhist


# ----------------------------------------------------------------------------
# Python-level operators


def generic_mutation(t: SpanningTree, g: Graph, rng: RngStream) -> np.ndarray:
    """Flip every edge-membership bit independently with probability 1/m.

    Returns the offspring as a boolean edge mask; it need not be a tree.
    """
    out = np.array(t.mask, dtype=bool)
    if g.m == 0:
        return out
    flips = rng.flip_positions(g.m, 1.0 / g.m)
    out[flips] = ~out[flips]
    return out


def generic_accept(current: MlstState, offspring) -> MlstState:
    """Adopt the offspring iff it is a spanning tree with no fewer leaves."""
    g = current.tree.graph
    mask = np.asarray(offspring, dtype=bool)
    if not is_spanning_tree(g, mask):
        return current
    cand = SpanningTree(g, mask, check=False)
    if cand.leaves >= current.leaves:
        return MlstState(cand, cand.leaves)
    return current


def _kernel_buffers(n):
    return (np.empty(n, dtype=np.int64), np.zeros(n + 1, dtype=np.int64),
            np.empty(n, dtype=np.int64), np.empty(n + 1, dtype=np.int64))


def tree_mutation(t: SpanningTree, g: Graph, rng: RngStream) -> SpanningTree:
    """Apply S ~ Poisson(1) random edge exchanges (S = 0 leaves t unchanged)."""
    mask = np.array(t.mask, dtype=bool)
    deg = np.array(t.degree, dtype=np.int64)
    _tree_mutation(rng.state, g.n, g.eu, g.ev, g.adj_ptr, g.adj_nbr, g.adj_eid,
                   mask, deg, *_kernel_buffers(g.n))
    return SpanningTree(g, mask, check=False)


def edge_exchange(t: SpanningTree, g: Graph, rng: RngStream) -> SpanningTree:
    """Exactly one random edge exchange."""
    mask = np.array(t.mask, dtype=bool)
    deg = np.array(t.degree, dtype=np.int64)
    _exchange(rng.state, g.n, g.eu, g.ev, g.adj_ptr, g.adj_nbr, g.adj_eid,
              mask, deg, *_kernel_buffers(g.n))
    return SpanningTree(g, mask, check=False)


def initial_tree(g: Graph, variant: str, rng: RngStream) -> SpanningTree:
    """Uniform random tree for the generic variant, BFS tree from 0 otherwise."""
    if variant == "generic":
        return random_spanning_tree(g, rng)
    return bfs_tree(g, 0)


def run_mlst(
    g: Graph,
    variant: str,
    budget: Budget,
    rng: RngStream,
    *,
    target: int | None = None,
    start: SpanningTree | None = None,
    backend: str = "compiled",
    trace=None,
) -> Trajectory:
    """Maximise the leaf count until ``target`` leaves or budget exhaustion.

    ``target`` defaults to the brute-force optimum.  ``backend="python"``
    runs the same steps through the Python operators (slow, but supports a
    ``trace(evaluations, MlstState)`` callback); both backends consume the
    random stream identically and return identical trajectories.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if target is None:
        from .oracles import brute_max_leaf_tree

        target = brute_max_leaf_tree(g).optimum_value
    tree = start if start is not None else initial_tree(g, variant, rng)
    if budget.remaining < 1:
        return Trajectory(maximize=True, evaluations=budget.evaluations_used, final=tree)
    if backend == "python":
        return _run_python(g, variant, budget, rng, target, tree, trace)

    mask = np.array(tree.mask, dtype=bool)
    hist_idx = np.zeros(g.n + 2, dtype=np.int64)
    hist_val = np.zeros(g.n + 2, dtype=np.int64)
    offset = budget.evaluations_used
    if variant == "generic":
        used, hit, nhist = _run_generic(rng.state, g.n, g.eu, g.ev, mask, target,
                                        budget.remaining, hist_idx, hist_val)
    else:
        used, hit, nhist = _run_tree_based(rng.state, g.n, g.eu, g.ev, g.adj_ptr, g.adj_nbr,
                                           g.adj_eid, mask, target, budget.remaining,
                                           hist_idx, hist_val)
    budget.charge(int(used))
    traj = Trajectory(maximize=True)
    traj.history = [(offset + int(i), int(v)) for i, v in zip(hist_idx[:nhist], hist_val[:nhist])]
    traj.hit_time = offset + int(hit) if hit >= 0 else None
    traj.evaluations = budget.evaluations_used
    traj.final = SpanningTree(g, mask, check=False)
    traj.info["target"] = target
    return traj


def _run_python(g, variant, budget, rng, target, tree, trace):
    from .engine import run_until

    state = {"cur": MlstState.of(tree), "started": False}

    def step(rng_, limit):
        if not state["started"]:
            state["started"] = True
            return 1, state["cur"].leaves
        cur = state["cur"]
        if variant == "generic":
            state["cur"] = generic_accept(cur, generic_mutation(cur.tree, g, rng_))
        else:
            off = tree_mutation(cur.tree, g, rng_)
            if off.leaves >= cur.leaves:
                state["cur"] = MlstState.of(off)
        return 1, state["cur"].leaves

    hook = None
    if trace is not None:
        def hook(evals, _value):
            trace(evals, state["cur"])

    traj = run_until(step, lambda v: v >= target, budget, rng, maximize=True, trace=hook)
    traj.final = state["cur"].tree
    traj.info["target"] = target
    return traj
