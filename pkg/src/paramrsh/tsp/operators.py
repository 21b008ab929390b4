"""Permutation moves on tours.

Positions are 0-based: ``inversion(t, i, j)`` reverses ``t[i..j]`` inclusive
and ``jump(t, i, j)`` moves the element at position i to position j.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..engine import RngStream
from ..errors import InvalidIndices, ParameterOutOfRange
from .geometry import PointSet


def tour_cost(ps: PointSet, tour) -> float:
    """Closed tour length, wrap-around edge included."""
    t = np.asarray(tour, dtype=np.int64)
    return float(ps.dist[t, np.roll(t, -1)].sum())


def is_permutation(tour, n: int) -> bool:
    t = np.asarray(tour)
    return t.shape == (n,) and np.array_equal(np.sort(t), np.arange(n))


def inversion(t, i: int, j: int) -> np.ndarray:
    """Reverse the segment of positions i..j (0 <= i < j < n)."""
    arr = np.array(t, copy=True)
    n = len(arr)
    if not (0 <= i < j < n):
        raise InvalidIndices(f"inversion needs 0 <= i < j < {n}, got ({i}, {j})")
    arr[i:j + 1] = arr[i:j + 1][::-1]
    return arr


def jump(t, i: int, j: int) -> np.ndarray:
    """Move the element at position i to position j, shifting the block between."""
    arr = np.array(t, copy=True)
    n = len(arr)
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise InvalidIndices(f"jump needs distinct positions in [0, {n}), got ({i}, {j})")
    v = arr[i]
    if i < j:
        arr[i:j] = arr[i + 1:j + 1]
    else:
        arr[j + 1:i + 1] = arr[j:i]
    arr[j] = v
    return arr


def _inplace_inversion(arr, i, j):
    arr[i:j + 1] = arr[i:j + 1][::-1]


def _inplace_jump(arr, i, j):
    v = arr[i]
    if i < j:
        arr[i:j] = arr[i + 1:j + 1].copy()
    else:
        arr[j + 1:i + 1] = arr[j:i].copy()
    arr[j] = v


def random_pair(n: int, rng: RngStream) -> tuple[int, int]:
    """Uniform ordered pair of distinct positions."""
    a = rng.randbelow(n)
    b = rng.randbelow(n - 1)
    if b >= a:
        b += 1
    return a, b


def random_inversion_pair(n: int, rng: RngStream) -> tuple[int, int]:
    """Uniform unordered pair of distinct positions, returned as (low, high)."""
    a, b = random_pair(n, rng)
    return (a, b) if a < b else (b, a)


def apply_random_ops(t, kind: str, count: int, rng: RngStream) -> np.ndarray:
    """Apply ``count`` uniformly random inversions or jumps to a copy of t.

    Sequences shorter than 2 have no moves and come back unchanged.
    """
    arr = np.array(t, copy=True)
    n = len(arr)
    if n < 2:
        return arr
    for _ in range(count):
        if kind == "inversion":
            i, j = random_inversion_pair(n, rng)
            _inplace_inversion(arr, i, j)
        elif kind == "jump":
            i, j = random_pair(n, rng)
            _inplace_jump(arr, i, j)
        else:
            raise ValueError(f"unknown move kind {kind!r}")
    return arr


def mutate_2opt(t, rng: RngStream) -> np.ndarray:
    """s + 1 random inversions with s ~ Poisson(1)."""
    s = rng.poisson1()
    return apply_random_ops(t, "inversion", s + 1, rng)


def mutate_jump(t, rng: RngStream) -> np.ndarray:
    """s + 1 random jumps with s ~ Poisson(1)."""
    s = rng.poisson1()
    return apply_random_ops(t, "jump", s + 1, rng)


def mutate_mixed(t, rng: RngStream) -> np.ndarray:
    """One fair coin picks the move kind, then s + 1 moves of that kind."""
    kind = "inversion" if rng.coin() == 0 else "jump"
    s = rng.poisson1()
    return apply_random_ops(t, kind, s + 1, rng)


MUTATIONS = {"2opt": mutate_2opt, "mixed": mutate_mixed, "jump": mutate_jump}


def success_probability_coefficient(k: int, ell: int) -> Fraction:
    """Rational factor of the bound: p(k, ell) = coefficient / e."""
    if k < 2 or ell < 1:
        raise ParameterOutOfRange("need k >= 2 and ell >= 1")
    return Fraction(1, math.factorial(ell - 1) * k ** (2 * ell))


def success_probability_bound(k: int, ell: int) -> float:
    """Lower bound 1 / (e (ell - 1)! k^(2 ell)) on hitting a specific ell-move sequence."""
    c = success_probability_coefficient(k, ell)
    return c.numerator / (c.denominator * math.e)
