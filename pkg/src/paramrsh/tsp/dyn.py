"""Tour cost of an inner-point order by dynamic programming, and the EA over such orders.

Given the hull order p_1..p_h (h = n - k) and an order x_1..x_k of the inner
points, the cheapest tour that visits hull points in hull order and inner
points in x order is found with two h x (k+1) tables:

    F_out[i][j]: cheapest path from p_1 through p_1..p_i and x_1..x_j ending at p_i
    F_inn[i][j]: the same but ending at x_j

Rows are 0-based here, so row 0 is p_1 alone.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..engine import Budget, RngStream, Trajectory
from ..errors import KTooLarge
from .geometry import PointSet
from .operators import apply_random_ops

INF = math.inf
REL_TOL = 1e-9
INTERLEAVE_CAP = 8


@dataclass
class DpTables:
    f_out: np.ndarray
    f_inn: np.ndarray
    value: float


def dyn_tables(ps: PointSet, x) -> DpTables:
    hull = ps.hull_order
    h = len(hull)
    k = len(x)
    d = ps.dist_list
    f_out = [[INF] * (k + 1) for _ in range(h)]
    f_inn = [[INF] * (k + 1) for _ in range(h)]
    f_out[0][0] = 0.0
    for i in range(h):
        p = hull[i]
        if i > 0:
            q = hull[i - 1]
            prev_out = f_out[i - 1]
            prev_inn = f_inn[i - 1]
            row = f_out[i]
            dq = d[q][p]
            row[0] = prev_out[0] + dq
            for j in range(1, k + 1):
                a = prev_out[j] + dq
                b = prev_inn[j] + d[x[j - 1]][p]
                row[j] = a if a < b else b
        row_out = f_out[i]
        row_inn = f_inn[i]
        dp = d[p]
        for j in range(1, k + 1):
            xj = x[j - 1]
            a = row_out[j - 1] + dp[xj]
            b = row_inn[j - 1] + d[x[j - 2]][xj] if j >= 2 else INF
            row_inn[j] = a if a < b else b
    p1 = hull[0]
    close_out = f_out[h - 1][k] + d[hull[h - 1]][p1]
    close_inn = f_inn[h - 1][k] + d[x[k - 1]][p1] if k else INF
    return DpTables(np.array(f_out), np.array(f_inn), min(close_out, close_inn))


def dyn_fitness(ps: PointSet, x) -> float:
    """Cheapest tour respecting both the hull order and the inner order x; O(nk)."""
    hull = ps.hull_order
    h = len(hull)
    k = len(x)
    d = ps.dist_list
    # rolling rows of both tables
    out_prev = [0.0] + [INF] * k
    inn_prev = [INF] * (k + 1)
    p = hull[0]
    dp = d[p]
    for j in range(1, k + 1):
        xj = x[j - 1]
        a = out_prev[j - 1] + dp[xj]
        b = inn_prev[j - 1] + d[x[j - 2]][xj] if j >= 2 else INF
        inn_prev[j] = a if a < b else b
    for i in range(1, h):
        q = p
        p = hull[i]
        dq = d[q][p]
        dp = d[p]
        out_row = [out_prev[0] + dq] + [INF] * k
        for j in range(1, k + 1):
            a = out_prev[j] + dq
            b = inn_prev[j] + dp[x[j - 1]]
            out_row[j] = a if a < b else b
        inn_row = [INF] * (k + 1)
        for j in range(1, k + 1):
            xj = x[j - 1]
            a = out_row[j - 1] + dp[xj]
            b = inn_row[j - 1] + d[x[j - 2]][xj] if j >= 2 else INF
            inn_row[j] = a if a < b else b
        out_prev, inn_prev = out_row, inn_row
    p1 = hull[0]
    close_out = out_prev[k] + d[hull[-1]][p1]
    close_inn = inn_prev[k] + d[x[k - 1]][p1] if k else INF
    return min(close_out, close_inn)


def dyn_tour(ps: PointSet, x) -> tuple[int, ...]:
    """An optimal merged tour for inner order x, recovered from the tables."""
    tables = dyn_tables(ps, x)
    f_out, f_inn = tables.f_out, tables.f_inn
    hull = ps.hull_order
    d = ps.dist
    k = len(x)
    i, j = len(hull) - 1, k
    p1 = hull[0]
    at_out = f_out[i][j] + d[hull[i], p1] <= (f_inn[i][j] + d[x[k - 1], p1] if k else INF)
    rev = []
    while not (i == 0 and j == 0 and at_out):
        if at_out:
            rev.append(hull[i])
            p = hull[i]
            from_out = f_out[i - 1][j] + d[hull[i - 1], p]
            from_inn = f_inn[i - 1][j] + d[x[j - 1], p] if j else INF
            at_out = from_out <= from_inn
            i -= 1
        else:
            xj = x[j - 1]
            rev.append(xj)
            from_out = f_out[i][j - 1] + d[hull[i], xj]
            from_inn = f_inn[i][j - 1] + d[x[j - 2], xj] if j >= 2 else INF
            at_out = from_out <= from_inn
            j -= 1
    return (p1,) + tuple(reversed(rev))


def brute_interleave(ps: PointSet, x) -> float:
    """Minimum over every merge of (p_2..p_h) with x, p_1 first (reference)."""
    k = len(x)
    if k > INTERLEAVE_CAP:
        raise KTooLarge(f"interleaving enumeration supports k <= {INTERLEAVE_CAP}")
    hull = ps.hull_order
    rest = list(hull[1:])
    total = len(rest) + k
    d = ps.dist
    best = INF
    for pos in itertools.combinations(range(total), k):
        pos_set = set(pos)
        seq = [hull[0]]
        hi = xi = 0
        for t in range(total):
            if t in pos_set:
                seq.append(x[xi])
                xi += 1
            else:
                seq.append(rest[hi])
                hi += 1
        c = sum(d[seq[a], seq[(a + 1) % len(seq)]] for a in range(len(seq)))
        best = min(best, c)
    return float(best)


def best_inner_order(ps: PointSet) -> tuple[float, tuple]:
    """min over all k! inner orders of dyn_fitness."""
    if ps.k > INTERLEAVE_CAP:
        raise KTooLarge(f"order enumeration supports k <= {INTERLEAVE_CAP}")
    best = (INF, ())
    for x in itertools.permutations(ps.inner):
        v = dyn_fitness(ps, x)
        if v < best[0]:
            best = (v, x)
    return best


OPS = {"jump": "jump", "2opt": "inversion"}


def run_ea_k(
    ps: PointSet,
    mu: int,
    lam: int,
    op: str,
    budget: Budget,
    rng: RngStream,
    *,
    opt: float | None = None,
    trace=None,
) -> Trajectory:
    """(mu+lambda) EA over inner-point orders with fitness dyn_fitness.

    Each offspring applies s + 1 random basic moves (jump or 2-opt) with
    s ~ Poisson(1); the mu best of parents plus offspring survive, ties
    favouring offspring.  With no inner points the hull tour is returned
    after a single evaluation.
    """
    if op not in OPS:
        raise ValueError(f"op must be one of {tuple(OPS)}")
    if mu < 1 or lam < 1:
        raise ValueError("mu and lambda must be positive")
    if opt is None:
        from ..oracles import held_karp

        opt = held_karp(ps).optimum_value
    kind = OPS[op]
    inner = np.array(ps.inner, dtype=np.int64)
    traj = Trajectory(maximize=False)

    def hit(v):
        return v <= opt * (1 + REL_TOL) + REL_TOL

    pop: list[tuple[float, np.ndarray]] = []
    n_init = 1 if ps.k == 0 else mu
    for _ in range(n_init):
        if budget.exhausted:
            break
        x = inner[rng.permutation(ps.k)] if ps.k else inner.copy()
        budget.charge(1)
        v = dyn_fitness(ps, x.tolist())
        pop.append((v, x))
        traj.observe(budget.evaluations_used, v)
        if hit(v) and traj.hit_time is None:
            traj.hit_time = budget.evaluations_used
    while ps.k > 0 and pop and not traj.success and not budget.exhausted:
        offspring = []
        for _ in range(min(lam, budget.remaining)):
            parent = pop[rng.randbelow(len(pop))][1]
            s = rng.poisson1()
            child = apply_random_ops(parent, kind, s + 1, rng)
            budget.charge(1)
            v = dyn_fitness(ps, child.tolist())
            offspring.append((v, child))
            traj.observe(budget.evaluations_used, v)
            if hit(v) and traj.hit_time is None:
                traj.hit_time = budget.evaluations_used
        merged = offspring + pop
        merged.sort(key=lambda item: item[0])
        pop = merged[:mu]
        if trace is not None:
            trace(budget.evaluations_used, pop)
    traj.evaluations = budget.evaluations_used
    if pop:
        best = min(pop, key=lambda item: item[0])
        traj.final = tuple(int(v) for v in best[1])
        traj.info["tour"] = dyn_tour(ps, traj.final)
    traj.info["opt"] = opt
    return traj
