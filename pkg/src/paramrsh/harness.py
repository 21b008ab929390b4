"""Seeded replicate runner for scaling experiments.

A config names an algorithm, an instance generator with a parameter grid, a
replicate count, a master seed and a budget rule.  Every (grid point,
instance, replicate) task gets its own random stream whose id is its
position in that enumeration, so results do not depend on how tasks are
scheduled across threads.
"""

from __future__ import annotations

import ast
import csv
import hashlib
import io
import itertools
import json
import math
import operator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .engine import Budget, RngStream, mix64
from .errors import EmptyInput, InsufficientPoints, OracleUnavailable, ParameterOutOfRange

INSTANCE_SALT = 0x6A09E667F3BCC909


# ----------------------------------------------------------------------------
# arithmetic expressions for budgets and assertions

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.FloorDiv: operator.floordiv,
    ast.Mod: operator.mod,
}
_FUNCS = {
    "log": math.log,
    "log2": math.log2,
    "exp": math.exp,
    "sqrt": math.sqrt,
    "factorial": lambda v: math.factorial(int(v)),
    "comb": lambda a, b: math.comb(int(a), int(b)),
    "max": max,
    "min": min,
    "ceil": math.ceil,
}


def eval_expr(expr: str | float | int, env: dict) -> float:
    """Evaluate an arithmetic formula over named variables (no attribute access)."""
    if isinstance(expr, (int, float)):
        return expr
    tree = ast.parse(str(expr).replace("^", "**"), mode="eval")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name):
            if node.id in env and env[node.id] is not None:
                return env[node.id]
            if node.id == "e":
                return math.e
            raise ParameterOutOfRange(f"unknown or unset variable {node.id!r} in {expr!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
            return _FUNCS[node.func.id](*[ev(a) for a in node.args])
        raise ParameterOutOfRange(f"unsupported expression element in {expr!r}")

    return ev(tree)


# ----------------------------------------------------------------------------
# config


ALGORITHM_IDS = ("mlst", "vc", "submodular", "rls", "mu_lambda", "fpt_ea", "ea_k")

# bound shapes with constant 1; the default budget is ten times the value
DEFAULT_SHAPES = {
    ("vc", "f2"): "n^2*log(n) + opt*n^2 + n*4^opt",
    ("vc", "f1"): "opt*n^4 + n*2^(opt + opt^2)",
    ("mlst", "tree_based"): "2^(15*k^2*log2(max(k, 2)))",
    ("mlst", "generic"): "2^(15*k^2*log2(max(k, 2)))",
    ("submodular", "gsemo_g"): "n^2*(log(n) + r)",
    ("submodular", "one_plus_one_h"): "n^(2*(num_matroids + 1) + 1) * num_matroids * log(n)",
    ("rls", None): "n^3 * max(a_eps, 1)",
    ("mu_lambda", "2opt"): "n*max(a_eps, 1)*max(mu*n^2, lam) + mu*n^(4*k)*factorial(max(2*k - 1, 0))",
    ("mu_lambda", "mixed"): "n*max(a_eps, 1)*max(mu*n^2, lam) + mu*n^(2*k)*factorial(max(k - 1, 0))",
    ("mu_lambda", "jump"): "n*max(a_eps, 1)*max(mu*n^2, lam) + mu*n^(2*k)*factorial(max(k - 1, 0))",
    ("fpt_ea", None): "mu + max(2^k*k^2*n^2, lam*n)",
    ("ea_k", "jump"): "mu + factorial(max(k - 1, 0))*k^(2*k)",
    ("ea_k", "2opt"): "mu + factorial(max(k - 2, 0))*k^(max(2*k - 2, 0))",
}
DEFAULT_BUDGET_CAP = 10**8


@dataclass
class ExperimentConfig:
    algorithm: str
    algorithm_params: dict
    generator: str
    generator_params: dict
    grid: dict
    replicates: int = 1
    master_seed: int = 0
    budget: dict = field(default_factory=lambda: {"rule": "default"})
    instances_per_point: int = 1
    workers: int = 1
    assertions: list = field(default_factory=list)
    name: str = "experiment"

    def __post_init__(self):
        if self.algorithm not in ALGORITHM_IDS:
            raise ParameterOutOfRange(f"algorithm must be one of {ALGORITHM_IDS}")
        if self.generator not in GENERATORS:
            raise ParameterOutOfRange(f"generator must be one of {tuple(GENERATORS)}")
        if self.replicates < 1 or self.instances_per_point < 1:
            raise ParameterOutOfRange("replicates and instances_per_point must be >= 1")
        if not isinstance(self.grid, dict) or any(not v for v in self.grid.values()):
            raise ParameterOutOfRange("grid axes must be nonempty lists")
        rule = self.budget.get("rule")
        if rule == "fixed":
            if "max_evaluations" not in self.budget:
                raise ParameterOutOfRange("fixed budget needs max_evaluations")
        elif rule == "fpt":
            if not all(key in self.budget for key in ("c", "g", "d")):
                raise ParameterOutOfRange("fpt budget needs c, g and d")
        elif rule != "default":
            raise ParameterOutOfRange("budget rule must be fixed, fpt or default")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        algo = data["algorithm"]
        inst = data["instance"]
        return cls(
            algorithm=algo["id"],
            algorithm_params=dict(algo.get("params", {})),
            generator=inst["generator"],
            generator_params=dict(inst.get("params", {})),
            grid={k: list(v) for k, v in inst.get("grid", {}).items()} or {"_": [None]},
            replicates=int(data.get("replicates", 1)),
            master_seed=int(data.get("master_seed", 0)),
            budget=dict(data.get("budget", {"rule": "default"})),
            instances_per_point=int(data.get("instances_per_point", 1)),
            workers=int(data.get("workers", 1)),
            assertions=list(data.get("assertions", [])),
            name=str(data.get("name", "experiment")),
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        grid = {} if self.grid == {"_": [None]} else self.grid
        return {
            "name": self.name,
            "algorithm": {"id": self.algorithm, "params": self.algorithm_params},
            "instance": {"generator": self.generator, "params": self.generator_params, "grid": grid},
            "replicates": self.replicates,
            "instances_per_point": self.instances_per_point,
            "master_seed": self.master_seed,
            "budget": self.budget,
            "workers": self.workers,
            "assertions": self.assertions,
        }

    def config_hash(self) -> str:
        """Digest of everything that affects results (worker count excluded)."""
        d = self.to_dict()
        d.pop("workers")
        d.pop("assertions")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def grid_points(self) -> list[dict]:
        keys = list(self.grid)
        out = []
        for combo in itertools.product(*(self.grid[k] for k in keys)):
            point = {k: v for k, v in zip(keys, combo) if k != "_"}
            out.append(point)
        return out


# ----------------------------------------------------------------------------
# instances


@dataclass
class Instance:
    kind: str  # graph | gloc | submodular | points
    payload: Any
    params: dict
    instance_id: str


def _gen_gloc(p, rng):
    from .graphs import gen_gloc

    inst = gen_gloc(int(p["r"]), int(p["n"]))
    return Instance("gloc", inst, {"n": inst.graph.n, "r": inst.r, "m": inst.graph.m},
                    f"gloc_r{inst.r}_n{inst.graph.n}")


def _graph_instance(g, name):
    return Instance("graph", g, {"n": g.n, "m": g.m}, name)


def _gen_complete_bipartite(p, rng):
    from .graphs import gen_complete_bipartite

    if "a" in p:
        a, b = int(p["a"]), int(p["b"])
    else:
        a = int(p["opt"])
        b = int(p["n"]) - a
    return _graph_instance(gen_complete_bipartite(a, b), f"K{a}_{b}")


def _gen_random_graph(p, rng):
    from .graphs import random_connected_graph

    g = random_connected_graph(int(p["n"]), float(p.get("p", 0.3)), rng)
    digest = hashlib.sha256(repr(g.edges).encode()).hexdigest()[:8]
    return _graph_instance(g, f"gnp_n{g.n}_{digest}")


def _gen_named_graph(p, rng):
    from . import graphs

    kind = p["graph"]
    if kind == "path":
        g = graphs.gen_path(int(p["n"]))
    elif kind == "cycle":
        g = graphs.gen_cycle(int(p["n"]))
    elif kind == "star":
        g = graphs.gen_star(int(p["n"]) - 1)
    elif kind == "complete":
        g = graphs.gen_complete(int(p["n"]))
    elif kind == "petersen":
        g = graphs.gen_petersen()
    else:
        raise ParameterOutOfRange(f"unknown named graph {kind!r}")
    return _graph_instance(g, f"{kind}_n{g.n}")


def _gen_graph_file(p, rng):
    from .graphs import read_graph

    g = read_graph(p["path"])
    if g.meta.get("generator") == "gloc":
        from .graphs import gen_gloc

        inst = gen_gloc(g.meta["r"], g.meta["n"])
        if inst.graph.edges == g.edges:
            return Instance("gloc", inst, {"n": g.n, "r": inst.r, "m": g.m}, Path(p["path"]).stem)
    return _graph_instance(g, Path(p["path"]).stem)


def _gen_coverage(p, rng):
    from .submodular import UniformMatroid, random_coverage

    f = random_coverage(int(p["n_sets"]), int(p["universe"]), rng, float(p.get("p", 0.2)))
    mats = [UniformMatroid(f.ground_size, int(p["r"]))]
    digest = hashlib.sha256(repr(f.sets).encode()).hexdigest()[:8]
    return Instance("submodular", (f, mats), {"n": f.ground_size, "r": int(p["r"]), "num_matroids": 1},
                    f"coverage_{digest}")


def _gen_cut(p, rng):
    from . import graphs
    from .submodular import CutFunction, UniformMatroid

    g = graphs.gen_petersen() if p.get("graph", "petersen") == "petersen" else _gen_named_graph(p, rng).payload
    f = CutFunction(g)
    mats = [UniformMatroid(f.ground_size, int(p["r"]))]
    return Instance("submodular", (f, mats), {"n": f.ground_size, "r": int(p["r"]), "num_matroids": 1},
                    f"cut_{p.get('graph', 'petersen')}_r{p['r']}")


def _gen_submodular_file(p, rng):
    from .submodular import load_instance

    inst = load_instance(p["path"])
    r = next((mt.r for mt in inst.matroids if getattr(mt, "kind", "") == "uniform"), None)
    return Instance("submodular", (inst.function, inst.matroids),
                    {"n": inst.function.ground_size, "r": r, "num_matroids": len(inst.matroids)},
                    Path(p["path"]).stem)


def _points_instance(ps, name):
    from .tsp.geometry import angle_bound

    eps, a_eps = angle_bound(ps)
    return Instance("points", ps, {"n": ps.n, "k": ps.k, "eps": eps, "a_eps": a_eps}, name)


def _digest_points(ps):
    return hashlib.sha256(ps.coords.tobytes()).hexdigest()[:8]


def _gen_convex(p, rng):
    from .tsp.geometry import convex_position_instance

    ps = convex_position_instance(int(p["n"]), int(p.get("m", 64)), rng)
    return _points_instance(ps, f"convex_n{ps.n}_{_digest_points(ps)}")


def _gen_inner_points(p, rng):
    from .tsp.geometry import inner_points_instance

    ps = inner_points_instance(int(p["n"]), int(p["k"]), int(p.get("m", 64)), rng)
    return _points_instance(ps, f"inner_n{ps.n}_k{ps.k}_{_digest_points(ps)}")


def _gen_random_points(p, rng):
    from .tsp.geometry import random_grid_instance

    ps = random_grid_instance(int(p["n"]), int(p.get("m", 64)), rng)
    return _points_instance(ps, f"grid_n{ps.n}_{_digest_points(ps)}")


def _gen_points_file(p, rng):
    from .tsp.geometry import read_points

    return _points_instance(read_points(p["path"]), Path(p["path"]).stem)


GENERATORS = {
    "gloc": _gen_gloc,
    "complete_bipartite": _gen_complete_bipartite,
    "random_graph": _gen_random_graph,
    "named_graph": _gen_named_graph,
    "graph_file": _gen_graph_file,
    "coverage": _gen_coverage,
    "cut": _gen_cut,
    "submodular_file": _gen_submodular_file,
    "convex": _gen_convex,
    "inner_points": _gen_inner_points,
    "random_points": _gen_random_points,
    "points_file": _gen_points_file,
}


def _graph(inst: Instance):
    """The plain graph of a graph or gloc instance."""
    return inst.payload.graph if inst.kind == "gloc" else inst.payload


def make_instance(cfg: ExperimentConfig, point: dict, grid_index: int, instance_index: int) -> Instance:
    params = {**cfg.generator_params, **point}
    seed = mix64(cfg.master_seed ^ INSTANCE_SALT)
    rng = RngStream(seed, grid_index * cfg.instances_per_point + instance_index)
    return GENERATORS[cfg.generator](params, rng)


def _oracle_value(cfg: ExperimentConfig, inst: Instance):
    from . import oracles

    if cfg.algorithm == "mlst":
        return oracles.brute_max_leaf_tree(_graph(inst)).optimum_value
    if cfg.algorithm == "vc":
        return oracles.brute_min_vertex_cover(_graph(inst), witnesses=False).optimum_value
    if cfg.algorithm == "submodular":
        f, mats = inst.payload
        return oracles.brute_submodular_opt(f, mats).optimum_value
    return oracles.held_karp(inst.payload).optimum_value


# ----------------------------------------------------------------------------
# records


COLUMNS = (
    "config_hash", "stream_id", "grid_index", "instance_index", "replicate",
    "algorithm", "instance_id", "n", "k", "r", "opt", "eps", "a_eps",
    "budget", "evaluations", "success", "hit_time", "final_value", "opt_value",
    "t_zero_n", "t_kernel", "t_opt", "t_no_crossings",
)
_INT_COLS = {"stream_id", "grid_index", "instance_index", "replicate", "n", "k", "r",
             "budget", "evaluations", "hit_time", "t_zero_n", "t_kernel", "t_opt", "t_no_crossings"}
_FLOAT_COLS = {"opt", "eps", "a_eps", "final_value", "opt_value"}


@dataclass
class RunRecord:
    config_hash: str
    stream_id: int
    grid_index: int
    instance_index: int
    replicate: int
    algorithm: str
    instance_id: str
    n: int | None = None
    k: int | None = None
    r: int | None = None
    opt: float | None = None
    eps: float | None = None
    a_eps: float | None = None
    budget: int = 0
    evaluations: int = 0
    success: bool = False
    hit_time: int | None = None
    final_value: float | None = None
    opt_value: float | None = None
    t_zero_n: int | None = None
    t_kernel: int | None = None
    t_opt: int | None = None
    t_no_crossings: int | None = None

    @property
    def time_to_success(self) -> int:
        """Hit time, or the evaluations spent for censored runs."""
        return self.hit_time if self.success else self.evaluations

    def grid_key(self) -> tuple:
        return (self.grid_index,)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for rec in records:
        w.writerow([_fmt(getattr(rec, c)) for c in COLUMNS])
    return buf.getvalue()


def parse_csv(text: str) -> list[RunRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != COLUMNS:
        raise ValueError("unexpected CSV header")
    out = []
    for row in rows[1:]:
        vals = {}
        for col, raw in zip(COLUMNS, row):
            if raw == "":
                vals[col] = None
            elif col in _INT_COLS:
                vals[col] = int(raw)
            elif col in _FLOAT_COLS:
                vals[col] = float(raw)
            elif col == "success":
                vals[col] = raw == "1"
            else:
                vals[col] = raw
        out.append(RunRecord(**vals))
    return out


# ----------------------------------------------------------------------------
# running


def _alg_variant(cfg: ExperimentConfig):
    p = cfg.algorithm_params
    return {
        "vc": p.get("fitness", "f2"),
        "mlst": p.get("variant", "tree_based"),
        "submodular": p.get("algorithm", "gsemo_g"),
        "mu_lambda": p.get("mutation", "2opt"),
        "ea_k": p.get("op", "2opt"),
    }.get(cfg.algorithm)


def budget_env(cfg: ExperimentConfig, inst: Instance, opt) -> dict:
    env = dict(inst.params)
    p = cfg.algorithm_params
    env.setdefault("k", None)
    env.update(mu=p.get("mu", 1), lam=p.get("lambda", 1), opt=opt)
    if cfg.algorithm == "mlst":
        env["k"] = opt  # the parameter is the maximum leaf count
    if cfg.algorithm == "fpt_ea":
        from .tsp.fpt import population_size

        env["mu"] = population_size(inst.params["n"], inst.params["k"])
    env.setdefault("a_eps", None)
    env.setdefault("num_matroids", 1)
    return env


def resolve_budget(cfg: ExperimentConfig, inst: Instance, opt) -> int:
    rule = cfg.budget["rule"]
    env = budget_env(cfg, inst, opt)
    if rule == "fixed":
        return int(eval_expr(cfg.budget["max_evaluations"], env))
    if rule == "fpt":
        from .engine import mc_cutoff

        g = eval_expr(cfg.budget["g"], env)
        return mc_cutoff(float(cfg.budget["c"]), g, env["n"], float(cfg.budget["d"]))
    shape = DEFAULT_SHAPES[(cfg.algorithm, _alg_variant(cfg))]
    try:
        value = 10 * eval_expr(shape, env)
    except OverflowError:
        return DEFAULT_BUDGET_CAP
    return int(min(math.ceil(value), DEFAULT_BUDGET_CAP))


def _run_one(cfg: ExperimentConfig, inst: Instance, opt, budget_cap: int, rng: RngStream) -> dict:
    p = cfg.algorithm_params
    budget = Budget(budget_cap)
    out: dict = {}
    if cfg.algorithm == "mlst":
        from .mlst import run_mlst

        g = _graph(inst)
        start = None
        if p.get("start") == "lopt":
            if inst.kind != "gloc":
                raise ParameterOutOfRange("start 'lopt' needs a gloc instance")
            start = inst.payload.t_lopt
        traj = run_mlst(g, p.get("variant", "tree_based"), budget, rng, target=opt, start=start)
    elif cfg.algorithm == "vc":
        from .vertex_cover import run_vc

        traj = run_vc(_graph(inst), p.get("fitness", "f2"), p.get("mutation", "alternative"), budget, rng,
                      opt=opt, milestones=bool(p.get("milestones", True)))
        out.update({k: v for k, v in traj.milestones.items() if k in ("t_zero_n", "t_kernel", "t_opt")})
    elif cfg.algorithm == "submodular":
        from .submodular import run_submodular_ea

        f, mats = inst.payload
        target = opt * float(p["target_ratio"]) if "target_ratio" in p else None
        traj = run_submodular_ea(f, mats, p.get("algorithm", "gsemo_g"), budget, rng, opt=opt, target=target)
    elif cfg.algorithm == "rls":
        from .tsp.blackbox import run_rls

        traj = run_rls(inst.payload, budget, rng, opt=opt, track_crossings=bool(p.get("track_crossings", True)))
        out["t_no_crossings"] = traj.milestones.get("t_no_crossings")
    elif cfg.algorithm == "mu_lambda":
        from .tsp.blackbox import run_mu_lambda

        traj = run_mu_lambda(inst.payload, int(p.get("mu", 1)), int(p.get("lambda", 1)),
                             p.get("mutation", "2opt"), budget, rng, opt=opt)
    elif cfg.algorithm == "fpt_ea":
        from .tsp.fpt import run_fpt_ea

        traj = run_fpt_ea(inst.payload, int(p.get("lambda", 1)), budget, rng, opt=opt,
                          check_invariant=bool(p.get("check_invariant", False)))
        if traj.info.get("invariant_violations"):
            raise AssertionError("population slot invariant violated")
    else:
        from .tsp.dyn import run_ea_k

        traj = run_ea_k(inst.payload, int(p.get("mu", 1)), int(p.get("lambda", 1)), p.get("op", "2opt"),
                        budget, rng, opt=opt)
    out.update(
        evaluations=traj.evaluations,
        success=traj.success,
        hit_time=traj.hit_time,
        final_value=None if traj.best is None else float(traj.best),
    )
    return out


def run_experiment(cfg: ExperimentConfig, *, workers: int | None = None, progress=None) -> list[RunRecord]:
    """All grid points x instances x replicates, ordered by stream id."""
    chash = cfg.config_hash()
    tasks = []
    prepared = []
    for gi, point in enumerate(cfg.grid_points()):
        for ii in range(cfg.instances_per_point):
            inst = make_instance(cfg, point, gi, ii)
            try:
                opt = _oracle_value(cfg, inst)
            except OracleUnavailable as exc:
                raise OracleUnavailable(f"grid point {point}: {exc}") from exc
            cap = resolve_budget(cfg, inst, opt)
            prepared.append((gi, ii, inst, opt, cap))
    stream = 0
    for gi, ii, inst, opt, cap in prepared:
        for rep in range(cfg.replicates):
            tasks.append((stream, gi, ii, rep, inst, opt, cap))
            stream += 1

    def work(task):
        sid, gi, ii, rep, inst, opt, cap = task
        res = _run_one(cfg, inst, opt, cap, RngStream(cfg.master_seed, sid))
        prm = inst.params
        rec = RunRecord(
            config_hash=chash, stream_id=sid, grid_index=gi, instance_index=ii, replicate=rep,
            algorithm=cfg.algorithm if _alg_variant(cfg) is None else f"{cfg.algorithm}:{_alg_variant(cfg)}",
            instance_id=inst.instance_id, n=prm.get("n"), k=prm.get("k"), r=prm.get("r"),
            opt=float(opt), eps=prm.get("eps"), a_eps=prm.get("a_eps"), budget=cap,
            evaluations=res["evaluations"], success=bool(res["success"]), hit_time=res["hit_time"],
            final_value=res["final_value"], opt_value=float(opt),
            t_zero_n=res.get("t_zero_n"), t_kernel=res.get("t_kernel"), t_opt=res.get("t_opt"),
            t_no_crossings=res.get("t_no_crossings"),
        )
        if cfg.algorithm == "mlst" and rec.k is None:
            rec.k = int(opt)
        if cfg.algorithm == "vc":
            rec.k = int(opt)
        if progress is not None:
            progress(rec)
        return rec

    n_workers = max(1, workers if workers is not None else cfg.workers)
    if n_workers == 1:
        records = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            records = list(pool.map(work, tasks))
    records.sort(key=lambda r: r.stream_id)
    return records


# ----------------------------------------------------------------------------
# aggregation


SUMMARY_COLUMNS = ("grid_index", "n", "k", "r", "opt", "runs", "successes", "success_rate",
                   "censored_fraction", "median", "mean", "q1", "q3", "iqr")


@dataclass
class SummaryRow:
    grid_index: int
    n: int | None
    k: int | None
    r: int | None
    opt: float | None
    runs: int
    successes: int
    success_rate: float
    censored_fraction: float
    median: float | None
    mean: float | None
    q1: float | None
    q3: float | None
    iqr: float | None


def summarize(records, *, exclude_censored: bool = False) -> list[SummaryRow]:
    """Per grid point statistics of time to success.

    Censored runs contribute their spent budget unless ``exclude_censored``
    is set; the censored fraction is always reported.  Quartiles use linear
    interpolation between order statistics.
    """
    records = list(records)
    if not records:
        raise EmptyInput("no records to summarize")
    groups: dict[int, list[RunRecord]] = {}
    for rec in records:
        groups.setdefault(rec.grid_index, []).append(rec)
    rows = []
    for gi in sorted(groups):
        recs = sorted(groups[gi], key=lambda r: r.stream_id)
        succ = sum(1 for r in recs if r.success)
        vals = [r.time_to_success for r in recs if r.success or not exclude_censored]
        arr = np.array(vals, dtype=float)
        if arr.size:
            q1, med, q3 = (float(v) for v in np.percentile(arr, [25, 50, 75]))
            mean = float(arr.mean())
        else:
            q1 = med = q3 = mean = None
        first = recs[0]
        ks = {r.k for r in recs}
        rows.append(SummaryRow(
            grid_index=gi, n=first.n, k=first.k if len(ks) == 1 else None, r=first.r,
            opt=first.opt if len({r.opt for r in recs}) == 1 else None,
            runs=len(recs), successes=succ, success_rate=succ / len(recs),
            censored_fraction=1 - succ / len(recs), median=med, mean=mean, q1=q1, q3=q3,
            iqr=None if q1 is None else q3 - q1,
        ))
    return rows


def emit_summary_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in rows:
        w.writerow([_fmt(getattr(row, c)) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


@dataclass
class FitResult:
    model: str
    slope: float
    intercept: float
    r2: float
    residuals: list
    xs: list
    ys: list


def scaling_fit(summary, model: str, *, axis: str = "n", value: str = "median") -> FitResult:
    """Least-squares slope of log(value) against log(axis) or axis.

    ``poly_in_n_fixed_k`` fits log-log (slope = polynomial degree);
    ``exp_in_k_fixed_n`` fits log-linear (slope = log of the growth base).
    ``summary`` may be SummaryRow objects or (x, y) pairs.
    """
    pts = []
    for row in summary:
        if isinstance(row, tuple):
            x, y = row
        else:
            x, y = getattr(row, axis), getattr(row, value)
        if x is None or y is None:
            continue
        pts.append((float(x), float(y)))
    if len(pts) < 3:
        raise InsufficientPoints(f"need at least 3 grid points, got {len(pts)}")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if np.any(ys <= 0):
        raise ParameterOutOfRange("fit values must be positive")
    if model == "poly_in_n_fixed_k":
        if np.any(xs <= 0):
            raise ParameterOutOfRange("axis values must be positive for a log-log fit")
        X = np.log(xs)
    elif model == "exp_in_k_fixed_n":
        X = xs
    else:
        raise ValueError(f"unknown model {model!r}")
    Y = np.log(ys)
    A = np.vstack([X, np.ones_like(X)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, Y, rcond=None)
    pred = slope * X + intercept
    ss_res = float(((Y - pred) ** 2).sum())
    ss_tot = float(((Y - Y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1 - ss_res / ss_tot
    return FitResult(model, float(slope), float(intercept), r2, (Y - pred).tolist(), xs.tolist(), ys.tolist())


# ----------------------------------------------------------------------------
# assertions


@dataclass
class AssertionOutcome:
    name: str
    passed: bool
    detail: str


def check_assertions(cfg: ExperimentConfig, records, summary=None) -> list[AssertionOutcome]:
    """Evaluate the config's embedded assertions.

    Kinds: ``success_rate_min`` (value), ``all_success``, ``median_max``
    (expr over n, k, r, opt), ``slope_max`` (model, axis, value) and
    ``milestone_before_hit`` (milestone column).
    """
    summary = summary if summary is not None else summarize(records)
    out = []
    for spec in cfg.assertions:
        kind = spec["kind"]
        if kind == "success_rate_min":
            worst = min(row.success_rate for row in summary)
            out.append(AssertionOutcome(kind, worst >= float(spec["value"]),
                                        f"min success rate {worst:.3f} vs {spec['value']}"))
        elif kind == "all_success":
            bad = sum(1 for r in records if not r.success)
            out.append(AssertionOutcome(kind, bad == 0, f"{bad} unsuccessful runs"))
        elif kind == "median_max":
            fails = []
            for row in summary:
                env = {"n": row.n, "k": row.k, "r": row.r, "opt": row.opt}
                bound = eval_expr(spec["expr"], env)
                if row.median is None or row.median > bound:
                    fails.append((row.grid_index, row.median, bound))
            out.append(AssertionOutcome(kind, not fails, f"violations {fails}" if fails else "all medians within bound"))
        elif kind == "slope_max":
            fit = scaling_fit(summary, spec["model"], axis=spec.get("axis", "n"))
            out.append(AssertionOutcome(kind, fit.slope <= float(spec["value"]),
                                        f"slope {fit.slope:.4f} (R^2 {fit.r2:.3f}) vs {spec['value']}"))
        elif kind == "milestone_before_hit":
            col = spec["milestone"]
            bad = sum(1 for r in records if r.success and (getattr(r, col) is None or getattr(r, col) > r.hit_time))
            out.append(AssertionOutcome(kind, bad == 0, f"{bad} successful runs without the milestone first"))
        else:
            raise ParameterOutOfRange(f"unknown assertion kind {kind!r}")
    return out
