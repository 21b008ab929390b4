"""Population EA over hull-respecting subtours.

For the hull order p_1, ..., p_{n-k} and inner set Inn, the population holds
one subtour per valid triple (i, S, r): the ground set is S plus
p_1..p_i, the head is p_1, the tail is r in S + {p_i}, and hull points keep
their hull order.  Offspring extend the ground set by one point per mutation
step and may only replace the slot with the same (i, S, r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..engine import Budget, RngStream, Trajectory
from ..errors import KTooLarge
from .geometry import PointSet

K_CAP = 12
REL_TOL = 1e-9


@dataclass(frozen=True)
class SubtourIndividual:
    """``order`` lists point ids; ``s`` is a bitmask over positions in ``ps.inner``."""

    i: int
    s: int
    r: int
    order: tuple

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.i, self.s, self.r)


def subtour_cost(ps: PointSet, ind: SubtourIndividual) -> float:
    """Closed cycle through ``order`` (two points: out and back; one point: 0)."""
    o = ind.order
    d = ps.dist
    return float(sum(d[o[j], o[(j + 1) % len(o)]] for j in range(len(o))))


def population_size_formula(n: int, k: int) -> int:
    """(n - k) * sum_s C(k, s) (s + 1), counting every (i, S, r) combination."""
    return (n - k) * sum(math.comb(k, s) * (s + 1) for s in range(k + 1))


def population_size(n: int, k: int) -> int:
    """Number of realisable slots.

    For i = 1 and nonempty S, tail p_1 would coincide with the head, so those
    2^k - 1 combinations have no subtour and are not in the population.
    """
    return population_size_formula(n, k) - (2**k - 1)


def valid_keys(ps: PointSet):
    hull = ps.hull_order
    k = ps.k
    for i in range(1, len(hull) + 1):
        for s in range(1 << k):
            tails = [ps.inner[b] for b in range(k) if (s >> b) & 1]
            if not (i == 1 and s):
                tails.append(hull[i - 1])
            for r in sorted(tails):
                yield (i, s, r)


def is_valid_individual(ps: PointSet, ind: SubtourIndividual) -> bool:
    hull = ps.hull_order
    inner_ids = {ps.inner[b] for b in range(ps.k) if (ind.s >> b) & 1}
    ground = set(hull[: ind.i]) | inner_ids
    o = ind.order
    if len(o) != len(ground) or set(o) != ground:
        return False
    if o[0] != hull[0] or o[-1] != ind.r:
        return False
    hull_pos = {p: idx for idx, p in enumerate(hull)}
    seq = [hull_pos[v] for v in o if v in hull_pos]
    return seq == sorted(seq)


def _random_individual(ps: PointSet, i: int, s: int, r: int, rng: RngStream) -> SubtourIndividual:
    hull = ps.hull_order
    p1 = hull[0]
    if i == 1 and r == p1:
        return SubtourIndividual(i, s, r, (p1,))
    hull_mid = [p for p in hull[1:i] if p != r]
    inner_mid = [ps.inner[b] for b in range(ps.k) if (s >> b) & 1 and ps.inner[b] != r]
    perm = rng.permutation(len(inner_mid))
    inner_mid = [inner_mid[j] for j in perm]
    # random interleaving of the two sequences, hull part kept in order
    total = len(hull_mid) + len(inner_mid)
    slots = sorted(int(x) for x in rng.permutation(total)[: len(inner_mid)])
    mid = []
    hi = ii = 0
    slot_set = set(slots)
    for pos in range(total):
        if pos in slot_set:
            mid.append(inner_mid[ii])
            ii += 1
        else:
            mid.append(hull_mid[hi])
            hi += 1
    return SubtourIndividual(i, s, r, (p1, *mid, r))


def init_fpt_population(ps: PointSet, rng: RngStream, *, k_cap: int = K_CAP) -> dict:
    """One random hull-respecting individual per valid slot, keyed by (i, S, r)."""
    if ps.k > k_cap:
        raise KTooLarge(f"{ps.k} inner points exceed the cap of {k_cap}")
    return {key: _random_individual(ps, *key, rng) for key in valid_keys(ps)}


def _candidates(ps: PointSet, ind: SubtourIndividual) -> list[tuple[int, int]]:
    """(point id, inner bit or -1) choices that extend the ground set."""
    out = [(ps.inner[b], b) for b in range(ps.k) if not (ind.s >> b) & 1]
    if ind.i < len(ps.hull_order):
        out.append((ps.hull_order[ind.i], -1))
    return out


def extend_mutation(ind: SubtourIndividual, ps: PointSet, rng: RngStream) -> SubtourIndividual:
    """Append a uniform point of (Inn - S) + {p_{i+1}} as the new tail."""
    cand = _candidates(ps, ind)
    if not cand:
        return ind
    v, bit = cand[rng.randbelow(len(cand))]
    if bit >= 0:
        return SubtourIndividual(ind.i, ind.s | (1 << bit), v, ind.order + (v,))
    return SubtourIndividual(ind.i + 1, ind.s, v, ind.order + (v,))


def is_complete(ps: PointSet, ind: SubtourIndividual) -> bool:
    return ind.i == len(ps.hull_order) and ind.s == (1 << ps.k) - 1


def run_fpt_ea(
    ps: PointSet,
    lam: int,
    budget: Budget,
    rng: RngStream,
    *,
    opt: float | None = None,
    k_cap: int = K_CAP,
    check_invariant: bool = False,
    trace=None,
) -> Trajectory:
    """Slot-replacement (mu+lambda) EA; success when a complete slot is optimal.

    Initialisation costs mu evaluations and each generation lambda more (the
    last one is cut to the remaining budget).  Offspring of a generation are
    all bred from the parent population, then compared one by one against
    their slot, replacing it when not more expensive.  ``info`` reports
    ``invariant_violations`` when ``check_invariant`` is set.
    """
    if lam < 1:
        raise ValueError("lambda must be positive")
    if opt is None:
        from ..oracles import held_karp

        opt = held_karp(ps).optimum_value
    keys = list(valid_keys(ps))
    traj = Trajectory(maximize=False)
    if ps.k > k_cap:
        raise KTooLarge(f"{ps.k} inner points exceed the cap of {k_cap}")
    pop: dict = {}
    cost: dict = {}
    for key in keys:
        if budget.exhausted:
            break
        ind = _random_individual(ps, *key, rng)
        budget.charge(1)
        pop[key] = ind
        cost[key] = subtour_cost(ps, ind)
    mu = len(keys)
    complete = [key for key in keys if key[0] == len(ps.hull_order) and key[1] == (1 << ps.k) - 1]
    violations = 0
    orphans = 0

    def best_complete():
        vals = [cost[key] for key in complete if key in cost]
        return min(vals) if vals else None

    def check():
        nonlocal violations
        ok = len(pop) == mu and all(pop[key].key == key and is_valid_individual(ps, pop[key]) for key in keys)
        if not ok:
            violations += 1

    best = best_complete()
    traj.observe(budget.evaluations_used, best)
    if best is not None and best <= opt * (1 + REL_TOL) + REL_TOL:
        traj.hit_time = budget.evaluations_used
    if len(pop) < mu:
        traj.evaluations = budget.evaluations_used
        return traj
    if check_invariant:
        check()
    while not traj.success and not budget.exhausted:
        offspring = []
        for _ in range(min(lam, budget.remaining)):
            z = pop[keys[rng.randbelow(mu)]]
            for _ in range(rng.poisson1() + 1):
                z = extend_mutation(z, ps, rng)
            budget.charge(1)
            offspring.append((z, subtour_cost(ps, z)))
        for z, cz in offspring:
            key = z.key
            if key not in pop:
                orphans += 1
                continue
            if cz <= cost[key]:
                pop[key] = z
                cost[key] = cz
        if check_invariant:
            check()
        best = best_complete()
        traj.observe(budget.evaluations_used, best)
        if trace is not None:
            trace(budget.evaluations_used, pop, cost)
        if best <= opt * (1 + REL_TOL) + REL_TOL:
            traj.hit_time = budget.evaluations_used
    traj.evaluations = budget.evaluations_used
    traj.final = min((pop[key] for key in complete), key=lambda ind: cost[ind.key])
    traj.info.update(opt=opt, mu=mu, orphans=orphans, invariant_violations=violations)
    return traj
