"""Escaping the gloc local optimum: tree-based vs generic mutation.

Both algorithms start from the locally optimal tree T_lopt.  The generic
bit-flip operator needs many simultaneous edge changes to leave it; the
tree-based operator performs edge exchanges and walks out.

    python3 demos/mlst_local_optimum.py [r] [n] [seeds]
"""

import statistics
import sys

from paramrsh.engine import Budget, RngStream
from paramrsh.graphs import gen_gloc, leaf_count
from paramrsh.mlst import run_mlst
from paramrsh.oracles import brute_max_leaf_tree


def main(r=5, n=30, seeds=20, budget=10**6):
    inst = gen_gloc(r, n)
    opt = brute_max_leaf_tree(inst.graph).optimum_value
    print(f"gloc(r={r}, n={n}): m={inst.graph.m}, leaves(T_lopt)={leaf_count(inst.t_lopt)}, optimum={opt}")
    for variant in ("tree_based", "generic"):
        hits = []
        for s in range(seeds):
            tr = run_mlst(inst.graph, variant, Budget(budget), RngStream(1, s), target=opt, start=inst.t_lopt)
            if tr.success:
                hits.append(tr.hit_time)
        med = statistics.median(hits) if hits else None
        print(f"  {variant:10s} solved {len(hits):3d}/{seeds}  median evaluations {med}")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:]))
