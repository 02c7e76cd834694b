"""Propagate random second-order runs and compare each step with the exact recursion.

    python3 scripts/compare_with_oracle.py --runs 50 --steps 10
"""

import argparse
import time

from exactsme import geometry as geo
from exactsme.instances import random_run
from exactsme.oracle import exact_step
from exactsme.propagation import propagate_front, seed_front


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--first-seed", type=int, default=0)
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--steps", type=int, default=10)
    ap.add_argument("--sample-density", type=int, default=64)
    args = ap.parse_args()

    start = time.perf_counter()
    flagged = 0
    for seed in range(args.first_seed, args.first_seed + args.runs):
        run = random_run(seed, 2, args.steps)
        front, _ = seed_front(run.system, run.x0, run.z)
        S = front.polytope
        worst, defects = 0.0, 0
        while front.k < args.steps:
            z = run.z[front.k]
            S = exact_step(S, run.system, z)
            front = propagate_front(front, z, run.system, sample_density=args.sample_density,
                                    oracle_hook=lambda _, S=S: S)
            worst = max(worst, geo.hausdorff_polytopes(S, front.polytope) / S.diameter)
            defects += len(front.diagnostics.defects)
        status = "ok" if worst <= 1e-6 and not defects else "MISMATCH"
        flagged += status != "ok"
        print(f"seed {seed:4d}  vertices {len(front.polytope.vertices):3d}  "
              f"hausdorff/diam {worst:.1e}  defects {defects}  {status}")
    print(f"{flagged} of {args.runs} runs mismatched, {time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
