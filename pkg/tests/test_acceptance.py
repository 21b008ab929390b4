"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line with timing."""

import itertools
import math
import statistics
import time

import networkx as nx
import numpy as np
import pytest

from paramrsh.engine import Budget, RngStream
from paramrsh.graphs import Graph, gen_complete_bipartite, gen_gloc, gen_petersen, random_connected_graph
from paramrsh.harness import ExperimentConfig, emit_csv, run_experiment, scaling_fit, summarize
from paramrsh.mlst import run_mlst
from paramrsh.oracles import brute_lp_half_integral, brute_max_leaf_tree, brute_min_vertex_cover, brute_submodular_opt, held_karp
from paramrsh.submodular import (
    CutFunction,
    UniformMatroid,
    approximation_bound_monotone_uniform,
    approximation_bound_symmetric,
    random_coverage,
    run_submodular_ea,
)
from paramrsh.tsp.blackbox import run_rls
from paramrsh.tsp.dyn import best_inner_order, brute_interleave, dyn_fitness, run_ea_k
from paramrsh.tsp.fpt import run_fpt_ea
from paramrsh.tsp.geometry import convex_position_instance, count_crossings, inner_points_instance
from paramrsh.vertex_cover import bits_of, lp_value, nt_split, run_vc

from .conftest import ACCEPTANCE_LINES, graph_from_networkx

SEED = 20240601


def report(number, ok, detail, start, limit_s):
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < limit_s
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail} [{elapsed:.1f}s, limit {limit_s:.0f}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def connected_labelled_graphs(n):
    pairs = list(itertools.combinations(range(n), 2))
    for bits in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if (bits >> i) & 1]
        h = nx.Graph(edges)
        h.add_nodes_from(range(n))
        if nx.is_connected(h):
            yield Graph(n, edges)


def random_graph(rng, n_lo, n_hi):
    n = n_lo + rng.randbelow(n_hi - n_lo + 1)
    return random_connected_graph(n, 0.15 + 0.7 * rng.random(), rng)


def test_criterion_01_lp_value_oracle_equivalence():
    start = time.perf_counter()
    rng = RngStream(SEED, 1)
    graphs = [g for n in range(1, 6) for g in connected_labelled_graphs(n)]
    exhaustive = len(graphs)
    graphs += [random_graph(rng, 6, 7) for _ in range(500)]
    bad = sum(1 for g in graphs if lp_value(g) != brute_lp_half_integral(g).optimum_value)
    report(1, bad == 0, f"lp_value vs half-integral enumeration on {exhaustive} labelled n<=5 graphs "
           f"+ 500 random n in 6..7: {bad} mismatches", start, 120)


def test_criterion_02_nt_split_property():
    start = time.perf_counter()
    rng = RngStream(SEED, 2)
    bad = 0
    for _ in range(500):
        g = random_graph(rng, 2, 8)
        split = nt_split(g)
        p0, p1 = bits_of(split.p0), bits_of(split.p1)
        covers = brute_min_vertex_cover(g, witnesses=True).witnesses
        bad += not any(c & p1 == p1 and c & p0 == 0 for c in covers)
    report(2, bad == 0, f"some minimum cover contains P1 and avoids P0 on 500 random graphs n<=8: {bad} violations",
           start, 120)


def test_criterion_03_edge_and_degree_bounds():
    start = time.perf_counter()
    from networkx.generators.atlas import graph_atlas_g

    graphs = [h for h in graph_atlas_g() if h.number_of_nodes() >= 3 and nx.is_connected(h)]
    atlas = len(graphs)
    # top up with pairwise non-isomorphic random n = 8 graphs (distinct WL hashes)
    seen = set()
    rng = RngStream(SEED, 3)
    while len(graphs) < 2000:
        g = random_graph(rng, 8, 8)
        h = nx.Graph(g.edges)
        key = nx.weisfeiler_lehman_graph_hash(h, iterations=4)
        if key not in seen:
            seen.add(key)
            graphs.append(h)
    bad = 0
    for h in graphs:
        g = graph_from_networkx(h)
        k = brute_max_leaf_tree(g, method="cds").optimum_value
        bad += g.m > g.n + 5 * k * k - 7 * k
        bad += sum(1 for d in g.degrees if d >= 3) > 10 * k - 14
    report(3, bad == 0, f"edge and degree-3 bounds on {atlas} atlas graphs (all connected, 3<=n<=7) "
           f"+ {len(graphs) - atlas} random n=8: {bad} violations", start, 300)


def test_criterion_04_mlst_operator_contrast():
    start = time.perf_counter()
    inst = gen_gloc(5, 30)
    opt = brute_max_leaf_tree(inst.graph).optimum_value
    rates = {}
    for variant in ("tree_based", "generic"):
        wins = 0
        for s in range(100):
            tr = run_mlst(inst.graph, variant, Budget(10**6), RngStream(SEED + 4, s), target=opt, start=inst.t_lopt)
            wins += tr.success
        rates[variant] = wins / 100
    ok = rates["tree_based"] >= 0.5 and rates["generic"] == 0
    report(4, ok, f"gloc(5,30) from T_lopt, 100 seeds, 1e6 budget: tree-based {rates['tree_based']:.2f}, "
           f"generic {rates['generic']:.2f}", start, 600)


def test_criterion_05_vertex_cover_fpt_shape():
    start = time.perf_counter()
    n = 20
    medians = []
    details = []
    ok = True
    for opt in (2, 3, 4):
        g = gen_complete_bipartite(opt, n - opt)
        budget = math.ceil(10 * (n * n * math.log(n) + opt * n * n + n * 4**opt))
        times = []
        wins = 0
        for s in range(100):
            tr = run_vc(g, "f2", "alternative", Budget(budget), RngStream(SEED + 5, 100 * opt + s), opt=opt,
                        milestones=False)
            wins += tr.success
            times.append(tr.hit_time if tr.success else tr.evaluations)
        med = statistics.median(times)
        medians.append((opt, med))
        ok &= wins >= 95
        details.append(f"OPT={opt}: {wins}/100 within {budget}, median {med:g}")
    fit = scaling_fit(medians, "exp_in_k_fixed_n")
    ok &= fit.slope <= 1.5 * math.log(4)
    report(5, ok, "; ".join(details) + f"; log-linear slope {fit.slope:.3f} <= {1.5 * math.log(4):.3f}", start, 1800)


def test_criterion_06_coverage_approximation():
    start = time.perf_counter()
    f = random_coverage(10, 20, RngStream(SEED, 6))
    mats = [UniformMatroid(10, 3)]
    opt = brute_submodular_opt(f, mats).optimum_value
    bound = approximation_bound_monotone_uniform()
    worst = math.inf
    for s in range(100):
        tr = run_submodular_ea(f, mats, "gsemo_g", Budget(10**6), RngStream(SEED + 6, s), opt=opt)
        worst = min(worst, tr.info["best_feasible"] / opt)
    report(6, worst >= bound - 1e-12, f"max coverage 10 sets/20 items r=3, 100 seeds: worst ratio {worst:.4f} "
           f">= {bound:.4f}", start, 600)


def test_criterion_07_symmetric_cut():
    start = time.perf_counter()
    f = CutFunction(gen_petersen())
    mats = [UniformMatroid(10, 5)]
    opt = brute_submodular_opt(f, mats).optimum_value
    bound = approximation_bound_symmetric(1, 0.1)
    assert bound == pytest.approx(1 / (3 * 1.1))
    worst = math.inf
    for s in range(100):
        tr = run_submodular_ea(f, mats, "gsemo_g", Budget(10**6), RngStream(SEED + 7, s), opt=opt)
        worst = min(worst, tr.info["best_feasible"] / opt)
    report(7, worst >= bound - 1e-12, f"Petersen cut r=5 (OPT {opt:g}), 100 seeds: worst ratio {worst:.4f} "
           f">= {bound:.4f}", start, 600)


def test_criterion_08_tsp_convex_rls():
    start = time.perf_counter()
    rng = RngStream(SEED, 8)
    wins = crossing_free = 0
    for s in range(100):
        ps = convex_position_instance(10, 64, rng)
        tr = run_rls(ps, Budget(10**6), RngStream(SEED + 8, s), track_crossings=True)
        wins += tr.success
        t0 = tr.milestones.get("t_no_crossings")
        crossing_free += t0 is not None and t0 <= (tr.hit_time or tr.evaluations) and count_crossings(ps, tr.final) == 0
    cfg = ExperimentConfig.from_dict({
        "name": "rls-convex-scaling",
        "algorithm": {"id": "rls", "params": {}},
        "instance": {"generator": "convex", "params": {"m": 64}, "grid": {"n": [8, 10, 12, 14]}},
        "instances_per_point": 20,
        "replicates": 5,
        "master_seed": SEED,
        "budget": {"rule": "fixed", "max_evaluations": 10**6},
    })
    summary = summarize(run_experiment(cfg))
    fit = scaling_fit(summary, "poly_in_n_fixed_k")
    ok = wins == 100 and crossing_free == 100 and fit.slope <= 5
    report(8, ok, f"RLS on 100 convex n=10 instances: {wins}/100 solved, {crossing_free}/100 crossing-free first; "
           f"median slope over n in 8..14 = {fit.slope:.3f} <= 5", start, 1200)


def test_criterion_09_fpt_ea_optimality():
    start = time.perf_counter()
    rng = RngStream(SEED, 9)
    runs = wins = violations = 0
    for k in (1, 2, 3):
        for i in range(50):
            ps = inner_points_instance(10, k, 64, rng)
            opt = held_karp(ps).optimum_value
            for s in range(20):
                tr = run_fpt_ea(ps, 10, Budget(10**6), RngStream(SEED + 9, runs), opt=opt, check_invariant=True)
                runs += 1
                wins += tr.success
                violations += tr.info["invariant_violations"]
    ok = wins == runs and violations == 0
    report(9, ok, f"n=10, k in 1..3, 50 instances per k x 20 seeds, lambda=10: {wins}/{runs} optimal, "
           f"{violations} slot invariant violations", start, 1800)


def test_criterion_10_dyn_correctness():
    start = time.perf_counter()
    rng = RngStream(SEED, 10)
    worst = 0.0
    hk_bad = 0
    for _ in range(500):
        k = rng.randbelow(4)
        n = max(4, k + 3) + rng.randbelow(10 - max(4, k + 3))
        ps = inner_points_instance(n, k, 64, rng)
        x = [ps.inner[i] for i in rng.permutation(k)]
        worst = max(worst, abs(dyn_fitness(ps, x) - brute_interleave(ps, x)))
        hk_bad += abs(best_inner_order(ps)[0] - held_karp(ps).optimum_value) > 1e-9
    ok = worst <= 1e-9 and hk_bad == 0
    report(10, ok, f"500 instances n<=9, k<=3: max |dyn - interleave| = {worst:.2e}; "
           f"min_x dyn != Held-Karp on {hk_bad}", start, 300)


def per_evaluation_seconds(ps, evaluations=3000, repeats=5):
    best = math.inf
    for r in range(repeats):
        t0 = time.perf_counter()
        tr = run_ea_k(ps, 1, 1, "2opt", Budget(evaluations), RngStream(SEED + 11, r), opt=0.0)
        best = min(best, (time.perf_counter() - t0) / tr.evaluations)
    return best


def test_criterion_11_ea_k_shape_and_linear_time():
    start = time.perf_counter()
    rng = RngStream(SEED, 11)
    details = []
    ok = True
    for k in (2, 3, 4):
        bound = 10 * math.factorial(k - 2) * k ** (2 * k - 2)
        times = []
        for s in range(100):
            ps = inner_points_instance(12, k, 64, rng)
            tr = run_ea_k(ps, 1, 1, "2opt", Budget(10**7), RngStream(SEED + 11, 1000 * k + s))
            times.append(tr.hit_time if tr.success else tr.evaluations)
        med = statistics.median(times)
        ok &= med <= bound
        details.append(f"k={k}: median {med:g} <= {bound}")
    ns = [50, 100, 200]
    secs = [per_evaluation_seconds(inner_points_instance(n, 4, 1 << 16, RngStream(SEED + 11, n))) for n in ns]
    slope, intercept = np.polyfit(ns, secs, 1)
    pred = slope * np.array(ns) + intercept
    r2 = 1 - float(((np.array(secs) - pred) ** 2).sum()) / float(((np.array(secs) - np.mean(secs)) ** 2).sum())
    loglog = scaling_fit(list(zip(ns, secs)), "poly_in_n_fixed_k").slope
    ok &= r2 >= 0.98 and slope > 0
    details.append(f"per-evaluation time at n=50/100/200: {', '.join(f'{s * 1e6:.1f}us' for s in secs)}, "
                   f"linear R^2 {r2:.4f} >= 0.98 (log-log slope {loglog:.2f})")
    report(11, ok, "; ".join(details), start, 1800)


DETERMINISM_CONFIGS = [
    {"algorithm": {"id": "mlst", "params": {"variant": "tree_based", "start": "lopt"}},
     "instance": {"generator": "gloc", "params": {"n": 9}, "grid": {"r": [3]}}},
    {"algorithm": {"id": "mlst", "params": {"variant": "generic"}},
     "instance": {"generator": "random_graph", "params": {"p": 0.4}, "grid": {"n": [6, 7]}}},
    {"algorithm": {"id": "vc", "params": {"fitness": "f1", "mutation": "standard"}},
     "instance": {"generator": "complete_bipartite", "params": {"n": 10}, "grid": {"opt": [2, 3]}}},
    {"algorithm": {"id": "submodular", "params": {"algorithm": "one_plus_one_h"}},
     "instance": {"generator": "coverage", "params": {"n_sets": 8, "universe": 14}, "grid": {"r": [2, 3]}}},
    {"algorithm": {"id": "mu_lambda", "params": {"mu": 2, "lambda": 3, "mutation": "jump"}},
     "instance": {"generator": "inner_points", "params": {"n": 8}, "grid": {"k": [1, 2]}}},
    {"algorithm": {"id": "fpt_ea", "params": {"lambda": 4}},
     "instance": {"generator": "random_points", "params": {}, "grid": {"n": [7, 8]}}},
    {"algorithm": {"id": "ea_k", "params": {"op": "jump", "mu": 2, "lambda": 2}},
     "instance": {"generator": "inner_points", "params": {"n": 10}, "grid": {"k": [2, 3]}}},
    {"algorithm": {"id": "rls", "params": {}},
     "instance": {"generator": "convex", "params": {}, "grid": {"n": [8, 9]}}},
]


def test_criterion_12_determinism():
    start = time.perf_counter()
    mismatches = 0
    for i, spec in enumerate(DETERMINISM_CONFIGS):
        cfg = ExperimentConfig.from_dict({**spec, "name": f"det-{i}", "replicates": 4, "instances_per_point": 2,
                                          "master_seed": SEED + i, "budget": {"rule": "fixed", "max_evaluations": 20000}})
        first = emit_csv(run_experiment(cfg))
        mismatches += first != emit_csv(run_experiment(cfg))
        mismatches += first != emit_csv(run_experiment(cfg, workers=3))
    report(12, mismatches == 0, f"{len(DETERMINISM_CONFIGS)} configs over all algorithms rerun serially and with "
           f"3 workers: {mismatches} byte mismatches (single platform)", start, 600)
