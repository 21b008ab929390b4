"""Quick cross-checks of every fast algorithmic component against an independent oracle.

Each check returns ``(name, passed, detail)``.  The whole suite runs in a few
seconds and backs the ``verify`` CLI subcommand.
"""

from __future__ import annotations

import math
from collections import Counter

from .engine import Budget, RngStream

SEED = 20240601


def _random_graphs(rng, count, n_lo, n_hi, p=0.4):
    from .graphs import random_connected_graph

    return [random_connected_graph(n_lo + rng.randbelow(n_hi - n_lo + 1), p, rng) for _ in range(count)]


def check_lp_value(rng):
    from .oracles import brute_lp_half_integral
    from .vertex_cover import lp_value

    bad = sum(1 for g in _random_graphs(rng, 60, 2, 7) if lp_value(g) != brute_lp_half_integral(g).optimum_value)
    return "lp_value matches half-integral enumeration", bad == 0, f"{bad} mismatches / 60"


def check_nt_split(rng):
    from .oracles import brute_min_vertex_cover
    from .vertex_cover import bits_of, nt_split

    bad = 0
    for g in _random_graphs(rng, 60, 2, 8):
        p0, p1, _ = nt_split(g)
        b0, b1 = bits_of(p0), bits_of(p1)
        covers = brute_min_vertex_cover(g, witnesses=True).witnesses
        if not any(c & b1 == b1 and c & b0 == 0 for c in covers):
            bad += 1
    return "nt_split agrees with some minimum cover", bad == 0, f"{bad} violations / 60"


def check_kernel_f2(rng):
    from .vertex_cover import kernel_check_f2, kernel_check_f2_enumerate

    bad = total = 0
    for g in _random_graphs(rng, 25, 2, 6):
        for x in range(0, 1 << g.n, max(1, (1 << g.n) // 8)):
            for strict in (False, True):
                total += 1
                bad += kernel_check_f2(g, x, strict=strict) != kernel_check_f2_enumerate(g, x, strict=strict)
    return "kernel_check_f2 matches enumeration", bad == 0, f"{bad} mismatches / {total}"


def check_max_leaf(rng):
    from .oracles import brute_max_leaf_tree

    bad = 0
    for g in _random_graphs(rng, 20, 3, 8):
        a = brute_max_leaf_tree(g, method="trees").optimum_value
        b = brute_max_leaf_tree(g, method="cds").optimum_value
        bad += a != b
    return "max-leaf tree enumeration equals n - min CDS", bad == 0, f"{bad} mismatches / 20"


def check_gloc(rng):
    from .graphs import gen_gloc, leaf_count
    from .oracles import brute_max_leaf_tree

    inst = gen_gloc(4, 16)
    g = inst.graph
    best = brute_max_leaf_tree(g).optimum_value
    ok = g.n == 16 and g.m == 21 and leaf_count(inst.t_opt) == best and leaf_count(inst.t_lopt) < best
    return "gen_gloc(4,16) shape and optimal tree", ok, f"n={g.n} m={g.m} opt={best} t_opt={leaf_count(inst.t_opt)}"


def check_wilson(rng):
    from .graphs import gen_complete, random_spanning_tree

    g = gen_complete(4)
    draws = 3200
    counts = Counter(random_spanning_tree(g, rng).key() for _ in range(draws))
    exp = draws / 16
    chi2 = sum((counts.get(k, 0) - exp) ** 2 / exp for k in counts) + (16 - len(counts)) * exp
    # 15 degrees of freedom; 37.7 is the 0.999 quantile
    return "random spanning trees uniform on K4", len(counts) == 16 and chi2 < 37.7, f"chi2={chi2:.1f}, trees={len(counts)}"


def check_mlst_backends(rng):
    from .graphs import gen_gloc
    from .mlst import run_mlst

    inst = gen_gloc(3, 9)
    ok = True
    for variant in ("generic", "tree_based"):
        sigs = []
        for backend in ("compiled", "python"):
            r = RngStream(SEED, 7)
            t = run_mlst(inst.graph, variant, Budget(2000), r, target=6, start=inst.t_lopt, backend=backend)
            sigs.append((t.signature(), tuple(r.getstate())))
        ok &= sigs[0] == sigs[1]
    return "compiled and Python MLST backends agree", ok, "identical trajectories" if ok else "diverged"


def check_held_karp(rng):
    from .oracles import brute_tsp, held_karp
    from .tsp.geometry import random_grid_instance

    bad = 0
    for _ in range(15):
        ps = random_grid_instance(5 + rng.randbelow(4), 32, rng)
        bad += abs(held_karp(ps).optimum_value - brute_tsp(ps).optimum_value) > 1e-9
    return "held_karp equals tour enumeration", bad == 0, f"{bad} mismatches / 15"


def check_dyn(rng):
    from .oracles import held_karp
    from .tsp.dyn import best_inner_order, brute_interleave, dyn_fitness
    from .tsp.geometry import inner_points_instance

    bad = 0
    for _ in range(30):
        k = 1 + rng.randbelow(3)
        ps = inner_points_instance(6 + rng.randbelow(4), k, 64, rng)
        x = [ps.inner[i] for i in rng.permutation(ps.k)]
        bad += abs(dyn_fitness(ps, x) - brute_interleave(ps, x)) > 1e-9
        bad += abs(best_inner_order(ps)[0] - held_karp(ps).optimum_value) > 1e-9
    return "dyn_fitness equals interleaving enumeration and Held-Karp", bad == 0, f"{bad} mismatches / 60"


def check_population_size(rng):
    from .tsp.fpt import population_size, valid_keys
    from .tsp.geometry import inner_points_instance

    bad = 0
    for k in (0, 1, 2, 3):
        ps = inner_points_instance(10, k, 64, rng)
        bad += len(list(valid_keys(ps))) != population_size(ps.n, ps.k)
    return "subtour slot count matches closed form", bad == 0, f"{bad} mismatches / 4"


def check_angle_bound(rng):
    from .tsp.geometry import angle_bound, grid_a_eps_cap, random_grid_instance

    worst = 0.0
    for _ in range(20):
        ps = random_grid_instance(8, 8, rng)
        worst = max(worst, angle_bound(ps)[1])
    cap = grid_a_eps_cap(8)
    return "A_eps within the 8-grid cap", worst <= cap, f"max A_eps={worst:.1f}, cap={cap:.1f}"


def check_submodular(rng):
    from .oracles import brute_submodular_opt
    from .submodular import UniformMatroid, random_coverage

    bad = 0
    for _ in range(5):
        f = random_coverage(8, 12, rng)
        mats = [UniformMatroid(8, 3)]
        opt = brute_submodular_opt(f, mats).optimum_value
        # greedy reaches at least (1 - 1/e) of the optimum under a cardinality constraint
        x = 0
        for _ in range(3):
            gains = [(f.value(x | (1 << i)) - f.value(x), -i) for i in range(8) if not (x >> i) & 1]
            x |= 1 << -max(gains)[1]
        bad += f.value(x) < (1 - 1 / math.e) * opt - 1e-9
        for _ in range(50):
            a, b = rng.randbelow(256), rng.randbelow(256)
            bad += f.value(a) + f.value(b) < f.value(a | b) + f.value(a & b) - 1e-9
    return "coverage functions are submodular and greedy-approximable", bad == 0, f"{bad} violations"


CHECKS = (
    check_lp_value,
    check_nt_split,
    check_kernel_f2,
    check_max_leaf,
    check_gloc,
    check_wilson,
    check_mlst_backends,
    check_held_karp,
    check_dyn,
    check_population_size,
    check_angle_bound,
    check_submodular,
)


def run_checks(seed: int = SEED):
    out = []
    for i, check in enumerate(CHECKS):
        out.append(check(RngStream(seed, i)))
    return out
