"""Problem-oblivious tour search: RLS and the (mu+lambda) EA."""

from __future__ import annotations

import numpy as np

from ..engine import Budget, RngStream, Trajectory
from .geometry import PointSet, count_crossings
from .operators import MUTATIONS, random_inversion_pair, tour_cost

REL_TOL = 1e-9


def _target(ps: PointSet, opt):
    if opt is None:
        from ..oracles import held_karp

        opt = held_karp(ps).optimum_value
    return opt


def reached(cost: float, opt: float) -> bool:
    return cost <= opt * (1 + REL_TOL) + REL_TOL


def _inversion_delta(d, t, i, j) -> float:
    n = len(t)
    if i == 0 and j == n - 1:
        return 0.0
    a, b = t[i - 1], t[i]
    c, e = t[j], t[(j + 1) % n]
    return d[a, c] + d[b, e] - d[a, b] - d[c, e]


def run_rls(
    ps: PointSet,
    budget: Budget,
    rng: RngStream,
    *,
    opt: float | None = None,
    start=None,
    trace=None,
    track_crossings: bool = False,
) -> Trajectory:
    """Random local search with one uniform inversion per step.

    The offspring replaces the current tour iff its cost is not larger
    (1e-9 tolerance on the cost change).  Success: cost reaches the optimum.
    With ``track_crossings`` the milestone ``t_no_crossings`` records the
    first evaluation at which the current tour had no crossing edges.
    """
    opt = _target(ps, opt)
    d = ps.dist
    n = ps.n
    traj = Trajectory(maximize=False)
    if budget.remaining < 1:
        return traj
    t = np.array(start, dtype=np.int64) if start is not None else rng.permutation(n)
    budget.charge(1)
    cost = tour_cost(ps, t)
    traj.observe(budget.evaluations_used, cost)

    def observe_state():
        if track_crossings and traj.milestones.get("t_no_crossings") is None:
            if count_crossings(ps, t) == 0:
                traj.mark("t_no_crossings", budget.evaluations_used)
        if trace is not None:
            trace(budget.evaluations_used, t, cost)

    observe_state()
    if reached(cost, opt):
        traj.hit_time = budget.evaluations_used
    while not traj.success and not budget.exhausted:
        i, j = random_inversion_pair(n, rng)
        budget.charge(1)
        delta = _inversion_delta(d, t, i, j)
        if delta <= 1e-9:
            t[i:j + 1] = t[i:j + 1][::-1]
            cost = tour_cost(ps, t)
            traj.observe(budget.evaluations_used, cost)
            observe_state()
            if reached(cost, opt):
                traj.hit_time = budget.evaluations_used
    traj.evaluations = budget.evaluations_used
    traj.final = t
    traj.info["opt"] = opt
    traj.info["final_cost"] = cost
    return traj


def run_mu_lambda(
    ps: PointSet,
    mu: int,
    lam: int,
    mutation: str,
    budget: Budget,
    rng: RngStream,
    *,
    opt: float | None = None,
    trace=None,
) -> Trajectory:
    """(mu+lambda) EA on tours.

    Parents are drawn uniformly, mutated with the chosen operator, and the
    mu cheapest of parents plus offspring survive (ties favour offspring).
    Each tour cost is one evaluation; the final generation is cut short when
    the budget runs out.
    """
    if mu < 1 or lam < 1:
        raise ValueError("mu and lambda must be positive")
    mutate = MUTATIONS[mutation]
    opt = _target(ps, opt)
    n = ps.n
    traj = Trajectory(maximize=False)
    pop: list[tuple[float, np.ndarray]] = []
    for _ in range(mu):
        if budget.exhausted:
            break
        t = rng.permutation(n)
        budget.charge(1)
        c = tour_cost(ps, t)
        pop.append((c, t))
        best = min(p[0] for p in pop)
        traj.observe(budget.evaluations_used, best)
        if reached(best, opt) and traj.hit_time is None:
            traj.hit_time = budget.evaluations_used
    while not traj.success and not budget.exhausted:
        offspring = []
        for _ in range(min(lam, budget.remaining)):
            parent = pop[rng.randbelow(len(pop))][1]
            child = mutate(parent, rng)
            budget.charge(1)
            c = tour_cost(ps, child)
            offspring.append((c, child))
            traj.observe(budget.evaluations_used, c)
            if reached(c, opt) and traj.hit_time is None:
                traj.hit_time = budget.evaluations_used
        merged = offspring + pop  # stable sort keeps offspring ahead on ties
        merged.sort(key=lambda item: item[0])
        pop = merged[:mu]
        if trace is not None:
            trace(budget.evaluations_used, pop)
    traj.evaluations = budget.evaluations_used
    traj.final = pop[0][1] if pop else None
    traj.info["opt"] = opt
    return traj
