import itertools
import math
import statistics

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paramrsh.engine import Budget, RngStream
from paramrsh.errors import KTooLarge
from paramrsh.oracles import held_karp
from paramrsh.tsp.dyn import best_inner_order, brute_interleave, dyn_fitness, dyn_tables, dyn_tour, run_ea_k
from paramrsh.tsp.geometry import convex_position_instance, inner_points_instance
from paramrsh.tsp.operators import is_permutation, tour_cost


def insertion_optimum(ps):
    """Best hull tour with the single inner point inserted into some hull edge."""
    h = list(ps.hull_order)
    v = ps.inner[0]
    return min(tour_cost(ps, h[: i + 1] + [v] + h[i + 1:]) for i in range(len(h)))


def respects(order, seq):
    pos = {v: i for i, v in enumerate(order)}
    idx = [pos[v] for v in seq]
    return idx == sorted(idx)


def test_no_inner_points_gives_hull_cost():
    rng = RngStream(21, 0)
    for _ in range(10):
        ps = convex_position_instance(9, 64, rng)
        assert dyn_fitness(ps, []) == pytest.approx(tour_cost(ps, ps.hull_order), rel=1e-12)


def test_one_inner_point_matches_insertion():
    rng = RngStream(21, 1)
    for _ in range(30):
        ps = inner_points_instance(4 + rng.randbelow(5), 1, 64, rng)
        assert dyn_fitness(ps, list(ps.inner)) == pytest.approx(insertion_optimum(ps), rel=1e-12)


def test_best_order_equals_held_karp():
    rng = RngStream(21, 2)
    for _ in range(15):
        ps = inner_points_instance(7 + rng.randbelow(3), 3, 64, rng)
        assert best_inner_order(ps)[0] == pytest.approx(held_karp(ps).optimum_value, rel=1e-9)


def test_dyn_equals_interleaving_and_bounds_optimum():
    rng = RngStream(21, 3)
    for _ in range(30):
        k = 1 + rng.randbelow(4)
        ps = inner_points_instance(6 + rng.randbelow(4), k, 64, rng)
        opt = held_karp(ps).optimum_value
        for perm in itertools.islice(itertools.permutations(ps.inner), 6):
            v = dyn_fitness(ps, list(perm))
            assert v == pytest.approx(brute_interleave(ps, list(perm)), rel=1e-12)
            assert v >= opt - 1e-9


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.integers(1, 4))
def test_recovered_tour_is_consistent(seed, k):
    rng = RngStream(seed, 4)
    ps = inner_points_instance(k + 4 + rng.randbelow(3), k, 64, rng)
    x = [ps.inner[i] for i in rng.permutation(k)]
    tables = dyn_tables(ps, x)
    assert tables.value == pytest.approx(dyn_fitness(ps, x), rel=1e-12)
    tour = dyn_tour(ps, x)
    assert is_permutation(list(tour), ps.n)
    assert tour_cost(ps, tour) == pytest.approx(tables.value, rel=1e-12)
    assert respects(tour, ps.hull_order)
    assert respects(tour, x)


def test_table_boundaries():
    ps = inner_points_instance(8, 2, 64, RngStream(21, 5))
    x = list(ps.inner)
    t = dyn_tables(ps, x)
    h = ps.hull_order
    assert t.f_out[0][0] == 0.0
    assert t.f_inn[0][1] == pytest.approx(ps.d(h[0], x[0]))
    assert t.f_inn[0][2] == pytest.approx(ps.d(h[0], x[0]) + ps.d(x[0], x[1]))
    path = 0.0
    for i in range(1, len(h)):
        path += ps.d(h[i - 1], h[i])
        assert t.f_out[i][0] == pytest.approx(path)
        assert math.isinf(t.f_inn[i][0])


def test_interleave_cap():
    ps = inner_points_instance(13, 9, 64, RngStream(21, 6))
    with pytest.raises(KTooLarge):
        brute_interleave(ps, list(ps.inner))
    with pytest.raises(KTooLarge):
        best_inner_order(ps)


def test_single_inner_point_solved_at_initialisation():
    rng = RngStream(21, 7)
    for seed in range(10):
        ps = inner_points_instance(8, 1, 64, rng)
        tr = run_ea_k(ps, 1, 1, "jump", Budget(100), RngStream(22, seed))
        assert tr.hit_time == 1


def test_no_inner_points_uses_one_evaluation():
    ps = convex_position_instance(8, 64, RngStream(21, 8))
    tr = run_ea_k(ps, 3, 3, "2opt", Budget(100), RngStream(22, 0))
    assert tr.evaluations == 1 and tr.success
    assert list(tr.info["tour"]) == list(ps.hull_order)


def test_four_inner_points_median_within_bound():
    k = 4
    bound = 10 * math.factorial(k - 2) * k ** (2 * k - 2)
    rng = RngStream(21, 9)
    times = []
    for seed in range(100):
        ps = inner_points_instance(12, k, 64, rng)
        tr = run_ea_k(ps, 1, 1, "2opt", Budget(10**6), RngStream(23, seed))
        assert tr.success
        times.append(tr.hit_time)
    assert statistics.median(times) <= bound


@pytest.mark.parametrize("op", ["jump", "2opt"])
def test_population_fitness_never_increases(op):
    ps = inner_points_instance(11, 5, 64, RngStream(21, 10))
    snaps = []

    def trace(ev, pop):
        assert len(pop) == 3
        for v, x in pop:
            assert sorted(x.tolist()) == sorted(ps.inner)
            assert v == pytest.approx(dyn_fitness(ps, x.tolist()), rel=1e-12)
        snaps.append(sorted(v for v, _ in pop))

    run_ea_k(ps, 3, 2, op, Budget(2000), RngStream(21, 11), opt=0.0, trace=trace)
    for a, b in zip(snaps, snaps[1:]):
        assert all(y <= x + 1e-12 for x, y in zip(a, b))


def test_ea_k_rejects_bad_parameters():
    ps = inner_points_instance(8, 2, 64, RngStream(21, 12))
    with pytest.raises(ValueError):
        run_ea_k(ps, 1, 1, "mixed", Budget(10), RngStream(0, 0))
    with pytest.raises(ValueError):
        run_ea_k(ps, 0, 1, "jump", Budget(10), RngStream(0, 0))
    assert np.isfinite(dyn_fitness(ps, list(ps.inner)))
