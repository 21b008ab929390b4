"""Seeded stochastic search kernel shared by every algorithm.

Random numbers come from xoshiro256** whose 256-bit state is seeded by a
splitmix64 sequence.  The starting point of the sequence for replicate
``stream_id`` of experiment ``master_seed`` is

    key = mix64(master_seed ^ mix64(stream_id * 0x9E3779B97F4A7C15 + 0xD1B54A32D192ED03))

where ``mix64`` is the splitmix64 finalizer (xor-shift 30, multiply, xor-shift
27, multiply, xor-shift 31).  All arithmetic is modulo 2**64, so a given
``(master_seed, stream_id)`` pair produces the same stream on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import _rng
from .errors import BudgetExceeded, ParameterOutOfRange

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
STREAM_SALT = 0xD1B54A32D192ED03


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_state(master_seed: int, stream_id: int) -> np.ndarray:
    key = mix64((master_seed & MASK64) ^ mix64(stream_id * GOLDEN + STREAM_SALT))
    words = []
    x = key
    for _ in range(4):
        x = (x + GOLDEN) & MASK64
        words.append(mix64(x))
    if not any(words):  # all-zero state is a fixed point of xoshiro
        words[0] = GOLDEN
    return np.array(words, dtype=np.uint64)


class RngStream:
    """A replicate's private random stream.

    The state array is handed directly to compiled kernels, which advance it
    in place; Python-side draws and kernel draws therefore interleave
    consistently.
    """

    __slots__ = ("master_seed", "stream_id", "state")

    def __init__(self, master_seed: int = 0, stream_id: int = 0):
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        self.state = derive_state(self.master_seed, self.stream_id)

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"

    def next_u64(self) -> int:
        return int(_rng.next_u64(self.state))

    def random(self) -> float:
        return float(_rng.uniform(self.state))

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ParameterOutOfRange(f"randbelow needs n >= 1, got {n}")
        return int(_rng.randbelow(self.state, n))

    def coin(self) -> int:
        return int(_rng.next_u64(self.state)) >> 63

    def poisson1(self) -> int:
        return int(_rng.poisson1(self.state))

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]

    def shuffle(self, arr: np.ndarray) -> None:
        _rng.shuffle(self.state, arr)

    def permutation(self, n: int) -> np.ndarray:
        arr = np.arange(n, dtype=np.int64)
        _rng.shuffle(self.state, arr)
        return arr

    def flip_positions(self, n: int, p: float) -> np.ndarray:
        """Indices in [0, n) selected independently with probability p."""
        out = np.empty(n, dtype=np.int64)
        cnt = _rng.flip_positions(self.state, n, p, out)
        return out[:cnt]

    def random_bits(self, n: int) -> int:
        """n independent fair bits packed into an int."""
        value = 0
        shift = 0
        while shift < n:
            value |= self.next_u64() << shift
            shift += 64
        return value & ((1 << n) - 1)

    def getstate(self) -> tuple[int, ...]:
        return tuple(int(w) for w in self.state)

    def setstate(self, words) -> None:
        self.state[:] = np.array(words, dtype=np.uint64)


def poisson_plus_one(rng: RngStream) -> int:
    """s + 1 with s ~ Poisson(1)."""
    return rng.poisson1() + 1


@dataclass
class Budget:
    max_evaluations: int
    evaluations_used: int = 0

    def __post_init__(self):
        if self.max_evaluations < 0:
            raise ParameterOutOfRange("max_evaluations must be >= 0")

    @property
    def remaining(self) -> int:
        return self.max_evaluations - self.evaluations_used

    @property
    def exhausted(self) -> bool:
        return self.evaluations_used >= self.max_evaluations

    def charge(self, cost: int) -> None:
        if cost < 0 or cost > self.remaining:
            raise BudgetExceeded(
                f"charge of {cost} with {self.remaining} evaluations remaining"
            )
        self.evaluations_used += cost


@dataclass
class Trajectory:
    """Best-so-far history of one run.

    ``history`` holds ``(evaluation_index, best_value)`` pairs, appended only
    when the best value strictly improves.  ``hit_time`` is the evaluation
    count at which the success predicate first held.
    """

    maximize: bool = True
    history: list = field(default_factory=list)
    hit_time: int | None = None
    evaluations: int = 0
    milestones: dict = field(default_factory=dict)
    final: Any = None
    info: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.hit_time is not None

    @property
    def best(self):
        return self.history[-1][1] if self.history else None

    def observe(self, index: int, value) -> None:
        if value is None:
            return
        if self.history:
            last_index, best = self.history[-1]
            if index <= last_index:
                raise ValueError("evaluation index must increase")
            better = value > best if self.maximize else value < best
            if not better:
                return
        self.history.append((index, value))

    def mark(self, name: str, index: int) -> None:
        """Record the first evaluation index at which a milestone held."""
        if self.milestones.get(name) is None:
            self.milestones[name] = index

    def signature(self) -> tuple:
        """Hashable summary used for replay comparisons."""
        return (
            tuple(self.history),
            self.hit_time,
            self.evaluations,
            tuple(sorted(self.milestones.items())),
        )


Step = Callable[[RngStream, int], "tuple[int, Any]"]


def run_until(
    step: Step,
    success: Callable[[Any], bool],
    budget: Budget,
    rng: RngStream,
    *,
    maximize: bool = True,
    trace: Callable[[int, Any], None] | None = None,
    trajectory: Trajectory | None = None,
) -> Trajectory:
    """Drive ``step`` until ``success`` holds or the budget runs out.

    ``step(rng, limit)`` performs one state transition using at most
    ``limit`` evaluations and returns ``(evaluations_spent, value)``.
    Running out of budget is a normal outcome: the trajectory simply has no
    ``hit_time``.
    """
    traj = trajectory if trajectory is not None else Trajectory(maximize=maximize)
    while not budget.exhausted:
        cost, value = step(rng, budget.remaining)
        if cost <= 0:
            raise ValueError("a step must consume at least one evaluation")
        budget.charge(cost)
        traj.observe(budget.evaluations_used, value)
        if trace is not None:
            trace(budget.evaluations_used, value)
        if success(value):
            traj.hit_time = budget.evaluations_used
            break
    traj.evaluations = budget.evaluations_used
    return traj


def mc_cutoff(c: float, g_of_k: float, n: int, d: float) -> int:
    """Monte-Carlo stopping budget ``c * g(k) * n**d``, rounded up."""
    return int(math.ceil(c * g_of_k * n**d))
