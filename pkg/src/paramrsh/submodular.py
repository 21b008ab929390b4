"""Submodular maximisation under matroid constraints.

Sets over the ground set {0, ..., n-1} are int bitmasks.  Two searches are
provided: a (1+1) EA on the lexicographic fitness (violation, value) and
Global SEMO on (z(x), number of zeros), where z is the function value on
feasible sets and -1 elsewhere.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .engine import Budget, RngStream, Trajectory
from .errors import ElementInSet, ParameterOutOfRange, UnsupportedP
from .graphs import Graph, parse_graph, read_graph

TOL = 1e-9
ALGORITHMS = ("one_plus_one_h", "gsemo_g")


def popcount(x: int) -> int:
    return bin(x).count("1")


def members(x: int) -> list[int]:
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


def as_mask(elements) -> int:
    out = 0
    for i in elements:
        out |= 1 << i
    return out


# ----------------------------------------------------------------------------
# set functions


class SubmodularOracle:
    """Set function on bitmasks.  Subclasses set the property flags."""

    monotone = False
    symmetric = False
    lower_bound = 0.0

    def __init__(self, ground_size: int):
        self.ground_size = ground_size

    @property
    def full(self) -> int:
        return (1 << self.ground_size) - 1

    def value(self, x: int) -> float:
        raise NotImplementedError

    def __call__(self, x: int) -> float:
        return self.value(x)


class CoverageFunction(SubmodularOracle):
    """Number of universe items covered by the chosen sets (monotone)."""

    monotone = True

    def __init__(self, sets, universe_size: int | None = None):
        sets = [frozenset(s) for s in sets]
        super().__init__(len(sets))
        self.sets = tuple(sets)
        items = set().union(*sets) if sets else set()
        self.universe_size = universe_size if universe_size is not None else (max(items) + 1 if items else 0)
        self._masks = tuple(as_mask(s) for s in sets)

    def value(self, x: int) -> float:
        covered = 0
        for i in members(x):
            covered |= self._masks[i]
        return float(popcount(covered))


class CutFunction(SubmodularOracle):
    """Number of graph edges with exactly one endpoint chosen (symmetric)."""

    symmetric = True

    def __init__(self, graph: Graph):
        super().__init__(graph.n)
        self.graph = graph

    def value(self, x: int) -> float:
        return float(sum(1 for u, v in self.graph.edges if ((x >> u) ^ (x >> v)) & 1))


class LinearFunction(SubmodularOracle):
    """Sum of nonnegative element weights (modular, monotone)."""

    monotone = True

    def __init__(self, weights):
        weights = [float(w) for w in weights]
        if any(w < 0 for w in weights):
            raise ParameterOutOfRange("weights must be nonnegative")
        super().__init__(len(weights))
        self.weights = tuple(weights)

    def value(self, x: int) -> float:
        return float(sum(self.weights[i] for i in members(x)))


def marginal(f: SubmodularOracle, a: int, i: int) -> float:
    """f(A + i) - f(A) for i not in A."""
    if (a >> i) & 1:
        raise ElementInSet(f"element {i} already in the set")
    return f.value(a | (1 << i)) - f.value(a)


# ----------------------------------------------------------------------------
# matroids


class MatroidOracle:
    kind = "abstract"

    def __init__(self, ground_size: int):
        self.ground_size = ground_size

    def rank(self, x: int) -> int:
        raise NotImplementedError

    def is_independent(self, x: int) -> bool:
        return self.rank(x) == popcount(x)


class UniformMatroid(MatroidOracle):
    kind = "uniform"

    def __init__(self, ground_size: int, r: int):
        if r < 0:
            raise ParameterOutOfRange("rank bound must be >= 0")
        super().__init__(ground_size)
        self.r = r

    def rank(self, x: int) -> int:
        return min(popcount(x), self.r)


class PartitionMatroid(MatroidOracle):
    """At most capacities[b] elements from block b; blocks partition the ground set."""

    kind = "partition"

    def __init__(self, ground_size: int, blocks, capacities):
        blocks = [tuple(b) for b in blocks]
        if len(blocks) != len(capacities):
            raise ParameterOutOfRange("one capacity per block")
        flat = sorted(i for b in blocks for i in b)
        if flat != list(range(ground_size)):
            raise ParameterOutOfRange("blocks must partition the ground set")
        super().__init__(ground_size)
        self.blocks = tuple(blocks)
        self.capacities = tuple(int(c) for c in capacities)
        self._masks = tuple(as_mask(b) for b in blocks)

    def rank(self, x: int) -> int:
        return sum(min(popcount(x & m), c) for m, c in zip(self._masks, self.capacities))


class GraphicMatroid(MatroidOracle):
    """Ground set = edges of a graph; independent sets are forests."""

    kind = "graphic"

    def __init__(self, graph: Graph):
        super().__init__(graph.m)
        self.graph = graph

    def rank(self, x: int) -> int:
        parent = list(range(self.graph.n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        r = 0
        for e in members(x):
            u, v = self.graph.edges[e]
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                r += 1
        return r


def violation(x: int, matroids) -> int:
    """k |x|_1 - sum_j r_j(x); zero exactly on sets independent in all k matroids."""
    return len(matroids) * popcount(x) - sum(mt.rank(x) for mt in matroids)


def is_feasible(x: int, matroids) -> bool:
    size = popcount(x)
    return all(mt.rank(x) == size for mt in matroids)


# ----------------------------------------------------------------------------
# fitness


@dataclass(frozen=True)
class LexFitness:
    violation: int
    value: float


def lex_fitness(f: SubmodularOracle, matroids, x: int) -> LexFitness:
    return LexFitness(violation(x, matroids), f.value(x))


def lex_accept(current: LexFitness, offspring: LexFitness) -> bool:
    """Less violation wins; on equal violation the value must not drop."""
    if offspring.violation != current.violation:
        return offspring.violation < current.violation
    return offspring.value >= current.value - TOL


def g_fitness(f: SubmodularOracle, matroids, x: int) -> tuple[float, int]:
    """(z(x), |x|_0), both maximised; z = -1 marks infeasible sets."""
    z = f.value(x) if is_feasible(x, matroids) else -1.0
    return (z, f.ground_size - popcount(x))


def _weakly_dominates(a, b) -> bool:
    return a[0] >= b[0] - TOL and a[1] >= b[1]


def _strictly_dominates(a, b) -> bool:
    return _weakly_dominates(a, b) and (a[0] > b[0] + TOL or a[1] > b[1])


def _standard_flip(n: int, x: int, rng: RngStream) -> int:
    flips = 0
    for pos in rng.flip_positions(n, 1.0 / n):
        flips |= 1 << int(pos)
    return x ^ flips


def run_submodular_ea(
    f: SubmodularOracle,
    matroids,
    algorithm: str,
    budget: Budget,
    rng: RngStream,
    *,
    opt: float | None = None,
    target: float | None = None,
    trace=None,
) -> Trajectory:
    """Maximise f subject to independence in every matroid.

    The run stops once the best feasible value reaches ``target`` (default:
    the brute-force optimum) or the budget is spent.  The trajectory value is
    the best feasible f seen so far; ``info["ratio"]`` is the final value over
    OPT.  ``trace(evaluations, state)`` receives the current search point
    for the (1+1) EA or the population list for Global SEMO.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}")
    n = f.ground_size
    if opt is None:
        from .oracles import brute_submodular_opt

        opt = brute_submodular_opt(f, matroids).optimum_value
    goal = opt if target is None else target
    traj = Trajectory(maximize=True)
    if budget.remaining < 1:
        return traj

    best = None

    def record(value):
        nonlocal best
        if value is not None and (best is None or value > best):
            best = value
        traj.observe(budget.evaluations_used, best)
        if best is not None and best >= goal - TOL and traj.hit_time is None:
            traj.hit_time = budget.evaluations_used

    x = rng.random_bits(n)
    budget.charge(1)
    if algorithm == "one_plus_one_h":
        fx = lex_fitness(f, matroids, x)
        record(fx.value if fx.violation == 0 else None)
        if trace is not None:
            trace(budget.evaluations_used, x)
        while not traj.success and not budget.exhausted:
            y = _standard_flip(n, x, rng)
            budget.charge(1)
            fy = lex_fitness(f, matroids, y)
            if lex_accept(fx, fy):
                x, fx = y, fy
            record(fy.value if fy.violation == 0 else None)
            if trace is not None:
                trace(budget.evaluations_used, x)
        traj.final = x
    else:
        pop = [(x, g_fitness(f, matroids, x))]
        record(pop[0][1][0] if pop[0][1][0] >= 0 else None)
        if trace is not None:
            trace(budget.evaluations_used, pop)
        while not traj.success and not budget.exhausted:
            parent = pop[rng.randbelow(len(pop))][0]
            y = _standard_flip(n, parent, rng)
            budget.charge(1)
            gy = g_fitness(f, matroids, y)
            if not any(_strictly_dominates(gz, gy) for _, gz in pop):
                pop = [(z, gz) for z, gz in pop if not _weakly_dominates(gy, gz)]
                pop.append((y, gy))
                pop.sort(key=lambda item: item[1][1])
            record(gy[0] if gy[0] >= 0 else None)
            if trace is not None:
                trace(budget.evaluations_used, pop)
        traj.final = pop
    traj.evaluations = budget.evaluations_used
    traj.info["opt"] = opt
    traj.info["best_feasible"] = best
    traj.info["ratio"] = (best / opt) if (best is not None and opt > 0) else None
    return traj


# ----------------------------------------------------------------------------
# local optimality


def _neighbors(x: int, n: int, max_insert: int, max_delete: int, single_delete: bool):
    inside = members(x)
    outside = [i for i in range(n) if not (x >> i) & 1]
    if single_delete:
        for d in inside:
            yield x & ~(1 << d)
    for a in range(1, max_insert + 1):
        for ins in itertools.combinations(outside, a):
            base = x | as_mask(ins)
            for b in range(0, max_delete + 1):
                for dels in itertools.combinations(inside, b):
                    yield base & ~as_mask(dels)
    if not single_delete:
        for b in range(1, max_delete + 1):
            for dels in itertools.combinations(inside, b):
                yield x & ~as_mask(dels)


def local_opt_check(
    f: SubmodularOracle,
    matroids,
    x: int,
    p: int = 1,
    eps: float = 0.1,
    *,
    neighborhood: str = "exchange",
) -> bool:
    """True iff no feasible neighbour y of x improves f by the factor required.

    ``neighborhood="exchange"``: insert at most 2p and delete at most 2kp
    elements, improvement factor 1 + eps / (n (k + 1)).
    ``neighborhood="delete_or_insert"``: delete one element, or insert one and
    delete at most k, improvement factor 1 + eps / n^4.
    An improving neighbour must also be strictly better than x, so a zero
    valued x is only improved by a positive neighbour.
    """
    if p != 1:
        raise UnsupportedP("only p = 1 exchange neighbourhoods are enumerated")
    if not is_feasible(x, matroids):
        raise ParameterOutOfRange("x must be feasible")
    n = f.ground_size
    k = len(matroids)
    fx = f.value(x)
    if neighborhood == "exchange":
        factor = 1 + eps / (n * (k + 1))
        gen = _neighbors(x, n, 2 * p, 2 * k * p, single_delete=False)
    elif neighborhood == "delete_or_insert":
        factor = 1 + eps / n**4
        gen = _neighbors(x, n, 1, k, single_delete=True)
    else:
        raise ValueError(f"unknown neighborhood {neighborhood!r}")
    threshold = factor * fx
    for y in gen:
        if y == x or not is_feasible(y, matroids):
            continue
        fy = f.value(y)
        if fy >= threshold - TOL and fy > fx + TOL:
            return False
    return True


# ----------------------------------------------------------------------------
# instances


def random_coverage(n_sets: int, universe: int, rng: RngStream, p: float = 0.2) -> CoverageFunction:
    """Each universe item joins each set independently with probability p.

    Every set is kept nonempty so that all elements matter.
    """
    sets = []
    for _ in range(n_sets):
        items = {int(i) for i in rng.flip_positions(universe, p)}
        if not items:
            items = {rng.randbelow(universe)}
        sets.append(items)
    return CoverageFunction(sets, universe)


def _load_graph(spec, base: Path) -> Graph:
    if isinstance(spec, str):
        return read_graph(base / spec)
    if isinstance(spec, dict) and "edges" in spec:
        return Graph(spec["n"], [tuple(e) for e in spec["edges"]], require_connected=False)
    if isinstance(spec, dict) and "text" in spec:
        return parse_graph(spec["text"], require_connected=False)
    raise ValueError("graph must be a path, {n, edges} or {text}")


def _build_function(spec, base: Path) -> SubmodularOracle:
    kind = spec["kind"]
    if kind == "coverage":
        return CoverageFunction(spec["sets"], spec.get("universe"))
    if kind == "cut":
        return CutFunction(_load_graph(spec["graph"], base))
    if kind == "linear":
        return LinearFunction(spec["weights"])
    raise ValueError(f"unknown function kind {kind!r}")


def _build_matroid(spec, n: int, base: Path) -> MatroidOracle:
    kind = spec["kind"]
    if kind == "uniform":
        return UniformMatroid(n, spec["r"])
    if kind == "partition":
        return PartitionMatroid(n, spec["blocks"], spec["capacities"])
    if kind == "graphic":
        mt = GraphicMatroid(_load_graph(spec["graph"], base))
        if mt.ground_size != n:
            raise ParameterOutOfRange("graphic matroid edge count must equal the ground set size")
        return mt
    raise ValueError(f"unknown matroid kind {kind!r}")


@dataclass
class SubmodularInstance:
    function: SubmodularOracle
    matroids: list


def instance_from_dict(data: dict, base: Path | str = ".") -> SubmodularInstance:
    """Build from ``{"function": {...}, "matroids": [{...}, ...]}``."""
    base = Path(base)
    f = _build_function(data["function"], base)
    mats = [_build_matroid(m, f.ground_size, base) for m in data.get("matroids", [])]
    return SubmodularInstance(f, mats)


def load_instance(path) -> SubmodularInstance:
    path = Path(path)
    return instance_from_dict(json.loads(path.read_text()), path.parent)


def instance_to_dict(f: SubmodularOracle, matroids) -> dict:
    if isinstance(f, CoverageFunction):
        fd = {"kind": "coverage", "sets": [sorted(s) for s in f.sets], "universe": f.universe_size}
    elif isinstance(f, CutFunction):
        fd = {"kind": "cut", "graph": {"n": f.graph.n, "edges": [list(e) for e in f.graph.edges]}}
    elif isinstance(f, LinearFunction):
        fd = {"kind": "linear", "weights": list(f.weights)}
    else:
        raise ValueError("only built-in functions serialise")
    md = []
    for mt in matroids:
        if isinstance(mt, UniformMatroid):
            md.append({"kind": "uniform", "r": mt.r})
        elif isinstance(mt, PartitionMatroid):
            md.append({"kind": "partition", "blocks": [list(b) for b in mt.blocks],
                       "capacities": list(mt.capacities)})
        elif isinstance(mt, GraphicMatroid):
            md.append({"kind": "graphic",
                       "graph": {"n": mt.graph.n, "edges": [list(e) for e in mt.graph.edges]}})
    return {"function": fd, "matroids": md}


def approximation_bound_monotone_uniform() -> float:
    return 1 - 1 / math.e


def approximation_bound_symmetric(k: int, eps: float) -> float:
    return 1 / ((k + 2) * (1 + eps))
