import math
import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paramrsh.engine import Budget, RngStream, Trajectory, derive_state, mc_cutoff, mix64, poisson_plus_one, run_until
from paramrsh.errors import BudgetExceeded

def _poisson_draws(count, seed=1):
    r = RngStream(seed, 0)
    return np.fromiter((poisson_plus_one(r) for _ in range(count)), dtype=np.int64, count=count)


def test_mix64_splitmix_reference():
    # splitmix64 with seed 0 yields 0xE220A8397B1DCDAF as its first output
    assert mix64(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF


def test_xoshiro_matches_independent_python_implementation():
    mask = (1 << 64) - 1

    def rotl(x, k):
        return ((x << k) | (x >> (64 - k))) & mask

    r = RngStream(99, 3)
    s = [int(w) for w in derive_state(99, 3)]
    for _ in range(50):
        expected = (rotl((s[1] * 5) & mask, 7) * 9) & mask
        t = (s[1] << 17) & mask
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        assert r.next_u64() == expected


def test_same_seed_same_stream():
    a, b = RngStream(7, 11), RngStream(7, 11)
    assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]


def test_distinct_streams_share_no_prefix():
    firsts = {RngStream(5, sid).next_u64() for sid in range(2000)}
    assert len(firsts) == 2000


def test_poisson_minimum_is_one():
    assert _poisson_draws(100_000).min() == 1


def test_poisson_mean_and_zero_mass():
    draws = _poisson_draws(1_000_000)
    assert abs(draws.mean() - 2.0) < 0.01
    assert abs((draws == 1).mean() - math.exp(-1)) < 0.005


def test_poisson_chi_square():
    draws = _poisson_draws(1_000_000, seed=2)
    counts = np.bincount(draws - 1)
    n = len(draws)
    probs = [math.exp(-1) / math.factorial(s) for s in range(6)]
    expected = [p * n for p in probs] + [n * (1 - sum(probs))]
    observed = list(counts[:6]) + [counts[6:].sum()]
    chi2 = sum((o - e) ** 2 / e for o, e in zip(observed, expected))
    # 6 degrees of freedom, 0.001 critical value
    assert chi2 < 22.46


def test_randbelow_uniform():
    r = RngStream(3, 0)
    counts = np.bincount([r.randbelow(7) for _ in range(70_000)], minlength=7)
    assert counts.min() > 9_500 and counts.max() < 10_500


def test_coin_is_fair():
    r = RngStream(4, 0)
    assert abs(np.mean([r.coin() for _ in range(200_000)]) - 0.5) < 0.005


def test_flip_positions_rate():
    r = RngStream(5, 0)
    total = sum(len(r.flip_positions(50, 0.02)) for _ in range(20_000))
    assert abs(total / 20_000 - 1.0) < 0.03


def test_permutation_is_permutation(rng):
    p = rng.permutation(20)
    assert sorted(p.tolist()) == list(range(20))


def test_state_roundtrip(rng):
    saved = rng.getstate()
    a = [rng.next_u64() for _ in range(5)]
    rng.setstate(saved)
    assert [rng.next_u64() for _ in range(5)] == a


def test_stream_usable_from_another_thread():
    r = RngStream(8, 1)
    expected = [RngStream(8, 1).next_u64() for _ in range(1)]
    out = []
    th = threading.Thread(target=lambda: out.append(r.next_u64()))
    th.start()
    th.join()
    assert out == expected


def test_run_until_immediate_success(rng):
    traj = run_until(lambda r, lim: (3, 1), lambda v: v == 1, Budget(100), rng)
    assert traj.hit_time == 3 and traj.success


def test_run_until_exhausts_budget(rng):
    budget = Budget(50)
    traj = run_until(lambda r, lim: (1, 0), lambda v: False, budget, rng)
    assert traj.hit_time is None and budget.evaluations_used == 50 and traj.evaluations == 50


def _onemax_step(n):
    state = {"x": 0}

    def step(r, limit):
        y = state["x"]
        for pos in r.flip_positions(n, 1.0 / n):
            y ^= 1 << int(pos)
        if bin(y).count("1") >= bin(state["x"]).count("1"):
            state["x"] = y
        return 1, bin(state["x"]).count("1")

    return step


def test_run_until_replay_identical():
    sigs = []
    for _ in range(2):
        traj = run_until(_onemax_step(20), lambda v: v == 20, Budget(10_000), RngStream(1, 9))
        sigs.append(traj.signature())
    assert sigs[0] == sigs[1] and sigs[0][1] is not None


def test_budget_never_overcharged():
    b = Budget(5)
    b.charge(5)
    with pytest.raises(BudgetExceeded):
        b.charge(1)


def test_trajectory_monotone_and_indices_increase():
    t = Trajectory(maximize=False)
    for i, v in enumerate([5, 7, 4, 4, 2, 9], start=1):
        t.observe(i, v)
    assert t.history == [(1, 5), (3, 4), (5, 2)]
    with pytest.raises(ValueError):
        t.observe(5, 1)


def test_mc_cutoff():
    assert mc_cutoff(2.0, 16, 10, 2) == 3200


@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6))
def test_derived_state_nonzero(seed, sid):
    assert any(int(w) for w in derive_state(seed, sid))
