"""Milestones of Global SEMO on vertex cover with the LP-based fitness.

For K_{OPT, n-OPT} each column is the median over the runs that recorded
that milestone (nan if none did).  On these graphs a kernel solution is
already optimal, so t_kernel and t_opt coincide.

    python3 demos/vc_milestones.py [n] [seeds]
"""

import statistics
import sys

from paramrsh.engine import Budget, RngStream
from paramrsh.graphs import gen_complete_bipartite
from paramrsh.vertex_cover import run_vc


def main(n=20, seeds=30):
    print(f"{'OPT':>3} {'t_zero_n':>9} {'t_kernel':>9} {'t_opt':>9}")
    for opt in (1, 2, 3, 4, 5):
        g = gen_complete_bipartite(opt, n - opt)
        cols = {"t_zero_n": [], "t_kernel": [], "t_opt": []}
        for s in range(seeds):
            tr = run_vc(g, "f2", "alternative", Budget(10**6), RngStream(2, 100 * opt + s), opt=opt)
            for key in cols:
                if tr.milestones.get(key) is not None:
                    cols[key].append(tr.milestones[key])
        meds = [statistics.median(v) if v else float("nan") for v in cols.values()]
        print(f"{opt:3d} " + " ".join(f"{m:9.0f}" for m in meds))


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:]))
