import numpy as np
import pytest

from paramrsh.engine import Budget, RngStream
from paramrsh.oracles import held_karp
from paramrsh.tsp.blackbox import reached, run_mu_lambda, run_rls
from paramrsh.tsp.geometry import convex_position_instance, count_crossings, inner_points_instance, random_grid_instance
from paramrsh.tsp.operators import is_permutation, tour_cost


def same_cycle(a, b):
    a, b = list(a), list(b)
    i = a.index(b[0])
    rot = a[i:] + a[:i]
    return rot == b or [rot[0]] + rot[:0:-1] == b


def test_rls_solves_convex_instances_after_removing_crossings():
    rng = RngStream(13, 0)
    for seed in range(20):
        ps = convex_position_instance(10, 64, rng)
        tr = run_rls(ps, Budget(10**6), RngStream(14, seed), track_crossings=True)
        assert tr.success
        assert tr.milestones["t_no_crossings"] <= tr.hit_time
        assert count_crossings(ps, tr.final) == 0
        assert same_cycle(tr.final, ps.hull_order)


def test_rls_cost_never_increases():
    ps = random_grid_instance(10, 32, RngStream(13, 1))
    costs = []

    def trace(ev, t, c):
        assert is_permutation(t, ps.n)
        assert c == pytest.approx(tour_cost(ps, t), rel=1e-12)
        costs.append(c)

    run_rls(ps, Budget(20_000), RngStream(13, 2), trace=trace)
    assert len(costs) > 1
    assert all(b <= a + 1e-9 for a, b in zip(costs, costs[1:]))


def test_rls_budget_and_start():
    ps = random_grid_instance(9, 32, RngStream(13, 3))
    tr = run_rls(ps, Budget(1), RngStream(13, 4), opt=0.0)
    assert tr.evaluations == 1 and not tr.success
    tr = run_rls(ps, Budget(500), RngStream(13, 4), opt=0.0)
    assert tr.evaluations == 500
    opt = held_karp(ps)
    tr = run_rls(ps, Budget(500), RngStream(13, 4), opt=opt.optimum_value, start=opt.witness)
    assert tr.hit_time == 1


def test_one_plus_one_ea_mixed_solves_two_inner_points():
    rng = RngStream(13, 5)
    wins = 0
    for seed in range(100):
        ps = inner_points_instance(10, 2, 64, rng)
        tr = run_mu_lambda(ps, 1, 1, "mixed", Budget(10**7), RngStream(15, seed))
        wins += tr.success
        if tr.success:
            assert reached(tour_cost(ps, tr.final), tr.info["opt"])
    assert wins >= 95


@pytest.mark.parametrize("mutation", ["2opt", "mixed", "jump"])
def test_population_costs_never_increase(mutation):
    ps = random_grid_instance(10, 32, RngStream(13, 6))
    snaps = []

    def trace(ev, pop):
        assert len(pop) == 3
        for c, t in pop:
            assert is_permutation(t, ps.n)
            assert c == pytest.approx(tour_cost(ps, t), rel=1e-12)
        snaps.append(sorted(c for c, _ in pop))

    run_mu_lambda(ps, 3, 4, mutation, Budget(3000), RngStream(13, 7), opt=0.0, trace=trace)
    for a, b in zip(snaps, snaps[1:]):
        assert all(y <= x + 1e-12 for x, y in zip(a, b))


def test_mu_lambda_charges_exact_budget():
    ps = random_grid_instance(10, 32, RngStream(13, 8))
    tr = run_mu_lambda(ps, 3, 5, "2opt", Budget(25), RngStream(13, 9), opt=0.0)
    assert tr.evaluations == 25
    tr = run_mu_lambda(ps, 3, 5, "2opt", Budget(2), RngStream(13, 9), opt=0.0)
    assert tr.evaluations == 2
    with pytest.raises(ValueError):
        run_mu_lambda(ps, 0, 1, "2opt", Budget(5), RngStream(13, 9))


def test_runs_replay_from_seed():
    ps = random_grid_instance(9, 32, RngStream(13, 10))
    a = run_mu_lambda(ps, 2, 3, "mixed", Budget(4000), RngStream(16, 1))
    b = run_mu_lambda(ps, 2, 3, "mixed", Budget(4000), RngStream(16, 1))
    assert a.signature() == b.signature()
    assert np.array_equal(a.final, b.final)
    c = run_rls(ps, Budget(4000), RngStream(16, 2))
    d = run_rls(ps, Budget(4000), RngStream(16, 2))
    assert c.signature() == d.signature()
