"""Minimum vertex cover by Global SEMO with the cover-count or LP-based fitness.

Solutions are Python ints used as vertex bitmasks (bit v set means v is in
the cover).  The LP relaxation of vertex cover is half-integral, so LP
values are carried internally as the integer ``lp2 = 2 * LP`` and exposed as
:class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .engine import Budget, RngStream, Trajectory
from .errors import OracleUnavailable
from .graphs import Graph

FITNESSES = ("f1", "f2")
MUTATIONS = ("standard", "alternative")
KERNEL_ENUM_CAP = 7


def popcount(x: int) -> int:
    return bin(x).count("1")


def bits_of(vertices) -> int:
    out = 0
    for v in vertices:
        out |= 1 << v
    return out


def vertices_of(x: int) -> list[int]:
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


def uncovered_edges(g: Graph, x: int) -> list[tuple[int, int]]:
    return [(u, v) for u, v in g.edges if not ((x >> u) & 1 or (x >> v) & 1)]


def uncovered(g: Graph, x: int) -> int:
    """Number of edges with neither endpoint in x."""
    return sum(1 for u, v in g.edges if not ((x >> u) & 1 or (x >> v) & 1))


def uncovered_vertices(g: Graph, x: int) -> int:
    """S(x): bitmask of vertices incident to an uncovered edge."""
    s = 0
    for u, v in g.edges:
        if not ((x >> u) & 1 or (x >> v) & 1):
            s |= (1 << u) | (1 << v)
    return s


# ----------------------------------------------------------------------------
# LP relaxation via the bipartite double cover


def _double_cover_matching(n: int, adj: list[list[int]]) -> list[int]:
    """Maximum matching of the double cover; returns match_right[v] (left id or -1).

    Left copy u is adjacent to right copy w for every edge uw of the graph.
    Kuhn's augmenting-path algorithm, iterative to avoid recursion limits.
    """
    match_r = [-1] * n
    for root in range(n):
        if not adj[root]:
            continue
        seen = [False] * n
        # stack of (left vertex, neighbour cursor); parents to flip on success
        stack = [(root, 0)]
        path_r: list[int] = []
        while stack:
            u, i = stack[-1]
            if i == len(adj[u]):
                stack.pop()
                if path_r:
                    path_r.pop()
                continue
            stack[-1] = (u, i + 1)
            w = adj[u][i]
            if seen[w]:
                continue
            seen[w] = True
            if match_r[w] == -1:
                # augment along the stack
                path_r.append(w)
                for (lu, _), rw in zip(stack, path_r):
                    match_r[rw] = lu
                break
            path_r.append(w)
            stack.append((match_r[w], 0))
    return match_r


def _live_adjacency(g: Graph, x: int) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(g.n)]
    for u, v in g.edges:
        if not ((x >> u) & 1 or (x >> v) & 1):
            adj[u].append(v)
            adj[v].append(u)
    return adj


def lp2(g: Graph, x: int = 0) -> int:
    """Twice the optimum of the vertex cover LP on G(x) (always an integer)."""
    adj = _live_adjacency(g, x)
    match_r = _double_cover_matching(g.n, adj)
    return sum(1 for m in match_r if m != -1)


def lp_value(g: Graph, x: int = 0) -> Fraction:
    """Exact LP optimum on G(x) = (V, E minus the edges covered by x)."""
    return Fraction(lp2(g, x), 2)


@dataclass(frozen=True)
class NtSplit:
    p0: frozenset
    p1: frozenset
    half: frozenset

    def __iter__(self):
        return iter((self.p0, self.p1, self.half))

    def assignment(self, n: int) -> tuple[Fraction, ...]:
        return tuple(
            Fraction(1) if v in self.p1 else Fraction(0) if v in self.p0 else Fraction(1, 2)
            for v in range(n)
        )


def nt_split(g: Graph, x: int = 0) -> NtSplit:
    """Partition V by an optimal half-integral LP solution on G(x).

    The solution is read off a minimum vertex cover C of the double cover
    (Koenig): with Z the set reachable from unmatched left copies by
    alternating paths, C = (L minus Z) + (R within Z), and vertex v gets value
    |{L_v, R_v} within C| / 2.  Vertices valued 0, 1, 1/2 form P0, P1, half.
    """
    n = g.n
    adj = _live_adjacency(g, x)
    match_r = _double_cover_matching(n, adj)
    match_l = [-1] * n
    for w, u in enumerate(match_r):
        if u != -1:
            match_l[u] = w
    z_left = [False] * n
    z_right = [False] * n
    queue = [u for u in range(n) if match_l[u] == -1]
    for u in queue:
        z_left[u] = True
    while queue:
        nxt = []
        for u in queue:
            for w in adj[u]:
                if z_right[w]:
                    continue
                z_right[w] = True
                back = match_r[w]
                if back != -1 and not z_left[back]:
                    z_left[back] = True
                    nxt.append(back)
        queue = nxt
    p0, p1, half = set(), set(), set()
    for v in range(n):
        val = (0 if z_left[v] else 1) + (1 if z_right[v] else 0)
        (p0 if val == 0 else p1 if val == 2 else half).add(v)
    return NtSplit(frozenset(p0), frozenset(p1), frozenset(half))


# ----------------------------------------------------------------------------
# objectives and archive


@dataclass(frozen=True)
class ObjectiveVector:
    """Pair of exact values; every coordinate here is minimised."""

    values: tuple
    directions: tuple = ("min", "min")

    def weakly_dominates(self, other: "ObjectiveVector") -> bool:
        return all(
            (a <= b) if d == "min" else (a >= b)
            for a, b, d in zip(self.values, other.values, self.directions)
        )

    def strictly_dominates(self, other: "ObjectiveVector") -> bool:
        return self.weakly_dominates(other) and self.values != other.values


def fitness_f1(g: Graph, x: int) -> ObjectiveVector:
    """(|x|_1, u(x)), both minimised."""
    return ObjectiveVector((popcount(x), uncovered(g, x)))


def fitness_f2(g: Graph, x: int) -> ObjectiveVector:
    """(|x|_1, LP(x)), both minimised; LP kept as an exact Fraction."""
    return ObjectiveVector((popcount(x), lp_value(g, x)))


class ParetoArchive:
    """Mutually non-dominated solutions keyed by their first objective."""

    __slots__ = ("members",)

    def __init__(self):
        self.members: dict[int, tuple[int, ObjectiveVector]] = {}

    def __len__(self):
        return len(self.members)

    def __contains__(self, x: int) -> bool:
        return any(sol == x for sol, _ in self.members.values())

    def solutions(self) -> list[int]:
        return [self.members[k][0] for k in sorted(self.members)]

    def items(self) -> list[tuple[int, ObjectiveVector]]:
        return [self.members[k] for k in sorted(self.members)]

    def vectors(self) -> list[tuple]:
        return [self.members[k][1].values for k in sorted(self.members)]

    def copy(self) -> "ParetoArchive":
        out = ParetoArchive()
        out.members = dict(self.members)
        return out


def semo_update(archive: ParetoArchive, candidate: int, vector: ObjectiveVector) -> bool:
    """Insert unless strictly dominated; weakly dominated members are evicted.

    Returns whether the candidate was inserted (mutates ``archive``).
    """
    for _, vec in archive.members.values():
        if vec.strictly_dominates(vector):
            return False
    for key in [k for k, (_, vec) in archive.members.items() if vector.weakly_dominates(vec)]:
        del archive.members[key]
    archive.members[vector.values[0]] = (candidate, vector)
    return True


# ----------------------------------------------------------------------------
# mutation


def standard_mutation(n: int, x: int, rng: RngStream) -> int:
    """Flip each of the n bits independently with probability 1/n."""
    flips = 0
    for pos in rng.flip_positions(n, 1.0 / n):
        flips |= 1 << int(pos)
    return x ^ flips


def alt_mutation(g: Graph, x: int, rng: RngStream) -> int:
    """Alternative mutation focusing on vertices of uncovered edges.

    If S(x) is empty, or a fair coin says so, this is standard mutation.
    Otherwise bits in S(x) flip with probability 1/2 and all other bits with
    probability 1/n.
    """
    n = g.n
    s = uncovered_vertices(g, x)
    if s == 0 or rng.coin() == 0:
        return standard_mutation(n, x, rng)
    half = rng.random_bits(n) & s
    rest = 0
    for pos in rng.flip_positions(n, 1.0 / n):
        rest |= 1 << int(pos)
    return x ^ half ^ (rest & ~s)


# ----------------------------------------------------------------------------
# kernel instrumentation


def kernel_check_f1(g: Graph, x: int, opt: int | None = None, optimal_covers=None) -> bool:
    """x is contained in some minimum cover and G(x) has max degree <= OPT."""
    if optimal_covers is None or opt is None:
        from .oracles import brute_min_vertex_cover

        if g.n > 16:
            raise OracleUnavailable("kernel_check_f1 needs all minimum covers (n <= 16)")
        res = brute_min_vertex_cover(g, witnesses=True)
        opt, optimal_covers = res.optimum_value, res.witnesses
    if not any(x & c == x for c in optimal_covers):
        return False
    deg = [0] * g.n
    for u, v in uncovered_edges(g, x):
        deg[u] += 1
        deg[v] += 1
    return max(deg, default=0) <= opt


def _non_isolated(g: Graph, x: int) -> int:
    return uncovered_vertices(g, x)


def kernel_check_f2(g: Graph, x: int, *, strict: bool = False, lp2_zero: int | None = None) -> bool:
    """LP-based kernel test for solution x.

    Requires LP(x) = LP(0^n) - |x|_1 and that G(x) is fully half on its
    non-isolated vertices: the all-1/2 assignment on those vertices is an
    optimal fractional cover of G(x).  With ``strict=True`` it must also be
    the only optimal fractional cover, i.e. no optimum may set a non-isolated
    vertex to 0 (any optimum setting one to 1 also sets one to 0).  An
    optimum with v at 0 exists iff deg(v) + LP(G(x) - N[v]) = LP(G(x)).
    """
    base = lp2(g) if lp2_zero is None else lp2_zero
    cur = lp2(g, x)
    if cur != base - 2 * popcount(x):
        return False
    live = _non_isolated(g, x)
    if cur != popcount(live):
        return False
    if not strict:
        return True
    for v in vertices_of(live):
        closed = (1 << v) | g.nbr_mask[v]
        deg_v = sum(1 for w in g.neighbors[v] if not (x >> w) & 1)
        # marking N[v] as chosen deletes it from G(x)
        rest = lp2(g, x | closed)
        if 2 * deg_v + rest == cur:
            return False
    return True


def kernel_check_f2_enumerate(g: Graph, x: int, *, strict: bool = False) -> bool:
    """Reference version of :func:`kernel_check_f2` by enumerating {0,1/2,1}^n."""
    from .oracles import brute_lp_half_integral

    if g.n > KERNEL_ENUM_CAP:
        raise OracleUnavailable(f"LP enumeration limited to n <= {KERNEL_ENUM_CAP}")
    half = Fraction(1, 2)
    base = brute_lp_half_integral(g, 0).optimum_value
    res = brute_lp_half_integral(g, x)
    if res.optimum_value != base - popcount(x):
        return False
    live = vertices_of(_non_isolated(g, x))
    patterns = [all(sol[v] == half for v in live) for sol in res.witnesses]
    return all(patterns) if strict else any(patterns)


# ----------------------------------------------------------------------------
# Global SEMO


class _Evaluator:
    def __init__(self, g: Graph, fitness: str):
        self.g = g
        self.fitness = fitness
        self.cache: dict[int, ObjectiveVector] = {}

    def __call__(self, x: int) -> ObjectiveVector:
        vec = self.cache.get(x)
        if vec is None:
            if self.fitness == "f1":
                vec = ObjectiveVector((popcount(x), uncovered(self.g, x)))
            else:
                vec = ObjectiveVector((popcount(x), Fraction(lp2(self.g, x), 2)))
            if len(self.cache) < 1 << 20:
                self.cache[x] = vec
        return vec


def is_cover_vector(vec: ObjectiveVector) -> bool:
    return vec.values[1] == 0


def run_vc(
    g: Graph,
    fitness: str,
    mutation: str,
    budget: Budget,
    rng: RngStream,
    *,
    opt: int | None = None,
    milestones: bool = True,
    trace=None,
) -> Trajectory:
    """Global SEMO on f1 or f2 with standard or alternative mutation.

    Success: the archive holds a vertex cover of size OPT (brute force when
    not supplied).  The trajectory value is the smallest cover size in the
    archive.  Milestones record the first evaluation at which 0^n, a kernel
    solution, and an optimal cover entered the archive.
    ``trace(evaluations, archive)`` is called after every evaluation.
    """
    if fitness not in FITNESSES:
        raise ValueError(f"fitness must be one of {FITNESSES}")
    if mutation not in MUTATIONS:
        raise ValueError(f"mutation must be one of {MUTATIONS}")
    n = g.n
    if opt is None:
        from .oracles import brute_min_vertex_cover

        opt = brute_min_vertex_cover(g, witnesses=False).optimum_value
    covers = None
    if milestones and fitness == "f1":
        if n <= 16:
            from .oracles import brute_min_vertex_cover

            covers = brute_min_vertex_cover(g, witnesses=True).witnesses
        else:
            milestones = False
    lp2_zero = lp2(g) if fitness == "f2" else None
    evaluate = _Evaluator(g, fitness)
    archive = ParetoArchive()
    traj = Trajectory(maximize=False)
    for name in ("t_zero_n", "t_kernel", "t_opt"):
        traj.milestones[name] = None

    def on_insert(x: int, vec: ObjectiveVector, idx: int):
        if x == 0:
            traj.mark("t_zero_n", idx)
        if milestones and traj.milestones["t_kernel"] is None:
            if fitness == "f1":
                hit = kernel_check_f1(g, x, opt, covers)
            else:
                hit = kernel_check_f2(g, x, lp2_zero=lp2_zero)
            if hit:
                traj.mark("t_kernel", idx)
        if is_cover_vector(vec) and vec.values[0] == opt:
            traj.mark("t_opt", idx)

    def best_cover():
        sizes = [vec.values[0] for _, vec in archive.members.values() if is_cover_vector(vec)]
        return min(sizes) if sizes else None

    x = rng.random_bits(n)
    if budget.remaining < 1:
        return traj
    budget.charge(1)
    vec = evaluate(x)
    semo_update(archive, x, vec)
    on_insert(x, vec, budget.evaluations_used)
    while True:
        value = best_cover()
        traj.observe(budget.evaluations_used, value)
        if trace is not None:
            trace(budget.evaluations_used, archive)
        if value is not None and value <= opt:
            traj.hit_time = budget.evaluations_used
            break
        if budget.exhausted:
            break
        keys = sorted(archive.members)
        parent = archive.members[keys[rng.randbelow(len(keys))]][0]
        if mutation == "standard":
            child = standard_mutation(n, parent, rng)
        else:
            child = alt_mutation(g, parent, rng)
        budget.charge(1)
        vec = evaluate(child)
        if semo_update(archive, child, vec):
            on_insert(child, vec, budget.evaluations_used)
    traj.evaluations = budget.evaluations_used
    traj.final = archive
    traj.info["opt"] = opt
    return traj


def pareto_line_members(g: Graph, archive: ParetoArchive, lp2_zero: int | None = None) -> set[int]:
    """Archive members with vector (r, LP(0^n) - r) under f2."""
    base = lp2(g) if lp2_zero is None else lp2_zero
    out = set()
    for x, vec in archive.items():
        r, lp = vec.values
        if 2 * lp == base - 2 * r:
            out.add(x)
    return out


class ParetoLineAudit:
    """Trace hook asserting that vectors on the line (r, LP(0^n) - r) persist.

    A member may be swapped for another solution with the same vector, so
    the audit tracks vectors rather than solutions.
    """

    def __init__(self, g: Graph):
        self.g = g
        self.lp2_zero = lp2(g)
        self.seen: set[tuple] = set()
        self.violations: list[tuple[int, tuple]] = []

    def __call__(self, evaluations: int, archive: ParetoArchive) -> None:
        present = set(archive.vectors())
        for vec in self.seen - present:
            self.violations.append((evaluations, vec))
        line = {archive.members[popcount(x)][1].values for x in pareto_line_members(self.g, archive, self.lp2_zero)}
        self.seen = (self.seen & present) | line


def tradeoff_audit(g: Graph, archive: ParetoArchive, eps: float, opt: int) -> bool:
    """Whether some member x has |x|_1 + 2 LP(x) <= (1 + eps) OPT under f2."""
    for x, vec in archive.items():
        r, lp = vec.values
        if r + 2 * lp <= (1 + eps) * opt + 1e-12:
            return True
    return False
