"""Write the data behind every figure to one directory.

    python3 scripts/reproduce_figures.py --out figures [--only fig2 fig5] [--n-traj 500]
"""
import argparse
import time

from drivenpair import __version__
from drivenpair.experiments import write_outputs
from drivenpair.figures import FIGURES, figure


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures")
    ap.add_argument("--only", nargs="*", choices=FIGURES)
    ap.add_argument("--n-traj", type=int, help="trajectories per curve for fig8/fig9")
    ap.add_argument("--seed", type=int)
    args = ap.parse_args()
    opts = {k: v for k, v in (("n_traj", args.n_traj), ("seed", args.seed)) if v is not None}
    for fig_id in args.only or FIGURES:
        start = time.perf_counter()
        res = figure(fig_id, opts)
        res.config["name"] = fig_id
        paths = write_outputs(res, args.out, __version__)
        print(f"{fig_id}: {len(paths)} files in {time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
