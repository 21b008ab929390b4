"""Command line entry point: gen, run, oracle, sweep and verify.

Exit codes: 0 success, 2 usage or input error, 1 failed verification,
failed config assertion or oracle size cap.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import KTooLarge, OracleUnavailable, ParamRshError


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _print_config(d: dict, out) -> None:
    print("# resolved config: " + json.dumps(d, sort_keys=True), file=out)


# ----------------------------------------------------------------------------
# gen


def _cmd_gen(args, out) -> int:
    from . import graphs
    from .engine import RngStream

    rng = RngStream(args.seed, 0)
    _print_config(vars_clean(args), out)
    kind = args.kind
    target = args.output
    if kind == "gloc":
        inst = graphs.gen_gloc(args.r, args.n)
        graphs.write_graph(target, inst.graph)
        print(f"wrote {target}: n={inst.graph.n} m={inst.graph.m}", file=out)
    elif kind == "kab":
        g = graphs.gen_complete_bipartite(args.a, args.b)
        graphs.write_graph(target, g, header=f"complete_bipartite a={args.a} b={args.b}")
        print(f"wrote {target}: n={g.n} m={g.m}", file=out)
    elif kind == "graph":
        g = graphs.random_connected_graph(args.n, args.p, rng)
        graphs.write_graph(target, g, header=f"random_connected n={args.n} p={args.p} seed={args.seed}")
        print(f"wrote {target}: n={g.n} m={g.m}", file=out)
    elif kind == "named":
        from .harness import _gen_named_graph

        g = _gen_named_graph({"graph": args.graph, "n": args.n}, rng).payload
        graphs.write_graph(target, g, header=f"{args.graph} n={g.n}")
        print(f"wrote {target}: n={g.n} m={g.m}", file=out)
    elif kind == "points":
        from .tsp import geometry

        if args.layout == "grid":
            ps = geometry.random_grid_instance(args.n, args.m, rng)
        else:
            ps = geometry.inner_points_instance(args.n, args.k if args.layout == "inner" else 0, args.m, rng)
        geometry.write_points(target, ps)
        print(f"wrote {target}: n={ps.n} k={ps.k}", file=out)
    elif kind == "coverage":
        from .submodular import UniformMatroid, instance_to_dict, random_coverage

        f = random_coverage(args.n_sets, args.universe, rng, args.p)
        Path(target).write_text(json.dumps(instance_to_dict(f, [UniformMatroid(f.ground_size, args.r)]), indent=1) + "\n")
        print(f"wrote {target}: {f.ground_size} sets over {args.universe} items", file=out)
    return 0


# ----------------------------------------------------------------------------
# run


def _single_config(args) -> dict:
    budget = {"rule": "fixed", "max_evaluations": args.budget}
    if args.problem == "mlst":
        algo = {"id": "mlst", "params": {"variant": args.variant, "start": args.start}}
        gen = "graph_file"
    elif args.problem == "vc":
        algo = {"id": "vc", "params": {"fitness": args.fitness, "mutation": args.mutation}}
        gen = "graph_file"
    elif args.problem == "submodular":
        algo = {"id": "submodular", "params": {"algorithm": args.algorithm}}
        gen = "submodular_file"
    else:
        ids = {"rls": "rls", "ea": "mu_lambda", "fpt-ea": "fpt_ea", "ea-k": "ea_k"}
        params = {}
        if args.algo == "ea":
            params = {"mu": args.mu, "lambda": args.lam, "mutation": args.mutation}
        elif args.algo == "fpt-ea":
            params = {"lambda": args.lam}
        elif args.algo == "ea-k":
            params = {"mu": args.mu, "lambda": args.lam, "op": args.mutation}
        algo = {"id": ids[args.algo], "params": params}
        gen = "points_file"
    return {
        "name": f"run-{args.problem}",
        "algorithm": algo,
        "instance": {"generator": gen, "params": {"path": args.instance}},
        "replicates": args.replicates,
        "master_seed": args.seed,
        "budget": budget,
    }


def _cmd_run(args, out) -> int:
    from .harness import ExperimentConfig, emit_csv, run_experiment

    if args.problem == "tsp" and args.algo == "ea-k" and args.mutation == "mixed":
        raise UsageError("ea-k supports --mutation 2opt or jump")
    d = _single_config(args)
    cfg = ExperimentConfig.from_dict(d)
    _print_config(cfg.to_dict(), out)
    records = run_experiment(cfg)
    text = emit_csv(records)
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    return 0


# ----------------------------------------------------------------------------
# oracle


def _cmd_oracle(args, out) -> int:
    from . import oracles

    _print_config(vars_clean(args), out)
    if args.problem in ("vc", "lp", "mlst"):
        from .graphs import read_graph

        g = read_graph(args.instance)
        if args.problem == "vc":
            res = oracles.brute_min_vertex_cover(g, witnesses=False)
        elif args.problem == "lp":
            res = oracles.brute_lp_half_integral(g)
        else:
            res = oracles.brute_max_leaf_tree(g)
    elif args.problem == "tsp":
        from .tsp.geometry import read_points

        res = oracles.held_karp(read_points(args.instance))
    else:
        from .submodular import load_instance

        inst = load_instance(args.instance)
        res = oracles.brute_submodular_opt(inst.function, inst.matroids)
    print(f"optimum {res.optimum_value}", file=out)
    print(f"search_space {res.search_space_size}", file=out)
    if res.witness is not None and args.problem == "tsp":
        print("tour " + " ".join(str(v) for v in res.witness), file=out)
    return 0


# ----------------------------------------------------------------------------
# sweep and verify


def _cmd_sweep(args, out) -> int:
    from .harness import ExperimentConfig, check_assertions, emit_csv, emit_summary_csv, run_experiment, summarize

    cfg = ExperimentConfig.load(args.config)
    d = cfg.to_dict()
    if args.workers is not None:
        d["workers"] = args.workers
    _print_config(d, out)
    records = run_experiment(cfg, workers=args.workers)
    Path(args.output).write_text(emit_csv(records))
    summary = summarize(records, exclude_censored=args.exclude_censored)
    summary_path = args.summary or str(Path(args.output).with_suffix("")) + "_summary.csv"
    Path(summary_path).write_text(emit_summary_csv(summary))
    print(f"wrote {len(records)} records to {args.output}, summary to {summary_path}", file=out)
    status = 0
    for res in check_assertions(cfg, records, summary):
        print(f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}", file=out)
        if not res.passed:
            status = 1
    return status


def _cmd_verify(args, out) -> int:
    from .verify import run_checks

    _print_config({"seed": args.seed}, out)
    status = 0
    for name, ok, detail in run_checks(args.seed):
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=out)
        if not ok:
            status = 1
    return status


# ----------------------------------------------------------------------------
# parser


def vars_clean(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="paramrsh", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a generated instance file")
    g.add_argument("kind", choices=["gloc", "kab", "graph", "named", "points", "coverage"])
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--r", type=int, default=3, help="gloc component size or coverage cardinality bound")
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--a", type=int, default=2)
    g.add_argument("--b", type=int, default=2)
    g.add_argument("--p", type=float, default=0.3, help="edge or membership probability")
    g.add_argument("--graph", default="petersen", choices=["path", "cycle", "star", "complete", "petersen"])
    g.add_argument("--layout", default="grid", choices=["grid", "convex", "inner"])
    g.add_argument("--k", type=int, default=0, help="inner points for --layout inner")
    g.add_argument("--m", type=int, default=64, help="grid side length")
    g.add_argument("--n-sets", type=int, default=10)
    g.add_argument("--universe", type=int, default=20)
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("run", help="run one algorithm on an instance file and print CSV records")
    rsub = r.add_subparsers(dest="problem", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("instance")
    common.add_argument("--budget", type=int, default=1_000_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--replicates", type=int, default=1)
    common.add_argument("-o", "--output")
    m = rsub.add_parser("mlst", parents=[common])
    m.add_argument("--variant", choices=["generic", "tree_based"], default="tree_based")
    m.add_argument("--start", choices=["default", "lopt"], default="default")
    v = rsub.add_parser("vc", parents=[common])
    v.add_argument("--fitness", choices=["f1", "f2"], default="f2")
    v.add_argument("--mutation", choices=["standard", "alternative"], default="alternative")
    s = rsub.add_parser("submodular", parents=[common])
    s.add_argument("--algorithm", choices=["gsemo_g", "one_plus_one_h"], default="gsemo_g")
    t = rsub.add_parser("tsp", parents=[common])
    t.add_argument("--algo", choices=["rls", "ea", "fpt-ea", "ea-k"], default="rls")
    t.add_argument("--mutation", choices=["2opt", "mixed", "jump"], default="2opt")
    t.add_argument("--mu", type=int, default=1)
    t.add_argument("--lambda", dest="lam", type=int, default=1)
    r.set_defaults(func=_cmd_run)

    o = sub.add_parser("oracle", help="print the brute-force optimum of an instance file")
    o.add_argument("problem", choices=["vc", "lp", "mlst", "tsp", "submodular"])
    o.add_argument("instance")
    o.set_defaults(func=_cmd_oracle)

    w = sub.add_parser("sweep", help="run an experiment config and write CSV")
    w.add_argument("config")
    w.add_argument("-o", "--output", required=True)
    w.add_argument("--summary")
    w.add_argument("--workers", type=int)
    w.add_argument("--exclude-censored", action="store_true")
    w.set_defaults(func=_cmd_sweep)

    c = sub.add_parser("verify", help="run the oracle cross-check suite")
    c.add_argument("--seed", type=int, default=20240601)
    c.set_defaults(func=_cmd_verify)
    return p


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"paramrsh: {exc}", file=sys.stderr)
        return 2
    except (OracleUnavailable, KTooLarge) as exc:
        print(f"paramrsh: oracle or size cap: {exc}", file=sys.stderr)
        return 1
    except (ParamRshError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"paramrsh: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
