"""Compiled xoshiro256** kernels.

All generator state lives in a ``uint64[4]`` array that is mutated in place,
so the same stream can be driven from Python (through :class:`RngStream`) or
from inside other compiled loops without any conversion.
"""

import numba as nb
import numpy as np

U64 = np.uint64
_INV_2_53 = 1.0 / 9007199254740992.0
_EXP_M1 = 0.36787944117144233
_POISSON_CAP = 40


@nb.njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << U64(k)) | (x >> U64(64 - k))


@nb.njit(cache=True)
def next_u64(s):
    s0 = s[0]
    s1 = s[1]
    s2 = s[2]
    s3 = s[3]
    result = _rotl(s1 * U64(5), 7) * U64(9)
    t = s1 << U64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3
    return result


@nb.njit(cache=True)
def uniform(s):
    """Double in [0, 1) from the top 53 bits."""
    return np.float64(next_u64(s) >> U64(11)) * _INV_2_53


@nb.njit(cache=True)
def randbelow(s, n):
    """Unbiased integer in [0, n) by masked rejection."""
    if n <= 1:
        return 0
    mask = U64(1)
    while mask < U64(n - 1):
        mask = (mask << U64(1)) | U64(1)
    # mask now covers n - 1
    while True:
        r = next_u64(s) & mask
        if r < U64(n):
            return np.int64(r)


@nb.njit(cache=True)
def poisson1(s):
    """Poisson(1) by cdf inversion; pmf terms are summed in increasing k."""
    u = uniform(s)
    k = 0
    p = _EXP_M1
    cdf = p
    while u >= cdf and k < _POISSON_CAP:
        k += 1
        p = p / k
        cdf = cdf + p
    return k


@nb.njit(cache=True)
def geometric_skip(s, log_q):
    """Number of failures before the next success, ``log_q = log(1 - p)``."""
    u = uniform(s)
    # 1 - u lies in (0, 1] so the log is finite
    return np.int64(np.floor(np.log(1.0 - u) / log_q))


@nb.njit(cache=True)
def flip_positions(s, n, p, out):
    """Write the indices in [0, n) that flip with probability p each.

    Returns how many were written to ``out``.
    """
    if p <= 0.0:
        return 0
    cnt = 0
    if p >= 1.0:
        for i in range(n):
            out[i] = i
        return n
    log_q = np.log(1.0 - p)
    pos = -1
    while True:
        pos += 1 + geometric_skip(s, log_q)
        if pos >= n:
            break
        out[cnt] = pos
        cnt += 1
    return cnt


@nb.njit(cache=True)
def shuffle(s, arr):
    """In-place Fisher-Yates, high index first."""
    for i in range(arr.shape[0] - 1, 0, -1):
        j = randbelow(s, i + 1)
        tmp = arr[i]
        arr[i] = arr[j]
        arr[j] = tmp


@nb.njit(cache=True)
def fill_u64(s, out):
    for i in range(out.shape[0]):
        out[i] = next_u64(s)
