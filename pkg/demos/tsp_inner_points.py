"""Four ways to solve a Euclidean TSP instance with k inner points.

Black-box RLS and (1+1) EA search all tours; the slot EA builds subtours
that respect the hull order; the EA over inner orders only permutes the k
inner points and lets the DP place them.  Evaluations to the Held-Karp
optimum are printed per method.

    python3 demos/tsp_inner_points.py [n] [k] [seeds]
"""

import statistics
import sys

from paramrsh.engine import Budget, RngStream
from paramrsh.oracles import held_karp
from paramrsh.tsp.blackbox import run_mu_lambda, run_rls
from paramrsh.tsp.dyn import run_ea_k
from paramrsh.tsp.fpt import population_size, run_fpt_ea
from paramrsh.tsp.geometry import angle_bound, inner_points_instance


def main(n=11, k=3, seeds=20, budget=10**6):
    ps = inner_points_instance(n, k, 64, RngStream(3, 0))
    opt = held_karp(ps).optimum_value
    eps, a_eps = angle_bound(ps)
    print(f"n={n} k={k} optimum={opt:.3f} eps={eps:.4f} A_eps={a_eps:.1f} slots={population_size(n, k)}")
    methods = {
        "RLS (2-opt)": lambda r: run_rls(ps, Budget(budget), r, opt=opt),
        "(1+1) EA mixed": lambda r: run_mu_lambda(ps, 1, 1, "mixed", Budget(budget), r, opt=opt),
        "slot EA, lambda=10": lambda r: run_fpt_ea(ps, 10, Budget(budget), r, opt=opt),
        "EA over inner orders": lambda r: run_ea_k(ps, 1, 1, "jump", Budget(budget), r, opt=opt),
    }
    for name, run in methods.items():
        trs = [run(RngStream(4, s)) for s in range(seeds)]
        hits = [t.hit_time for t in trs if t.success]
        med = statistics.median(hits) if hits else None
        print(f"  {name:22s} solved {len(hits):3d}/{seeds}  median evaluations {med}")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:]))
