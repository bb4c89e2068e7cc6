"""Connecting-orbit runs over phases of the phi_2 lift (and optionally several r).

Each run prints t*, plateau energy and duration, and the normalization time;
with two or more phases the rotated snapshots are compared against the first.
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np

from cliffordflow.flow import shoot_connecting_orbit
from cliffordflow.grids import ReducedGrid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--r", type=float, nargs="+", default=[0.5])
    ap.add_argument("--phase-steps", type=int, nargs="+", default=[0, 32],
                    help="phases as multiples of the theta spacing")
    ap.add_argument("--N-s", type=int, default=256)
    ap.add_argument("--N-theta", type=int, default=128)
    ap.add_argument("--bisect-tol", type=float, default=1e-6)
    ap.add_argument("--out", default="out/shoot_family")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dth = 2 * math.pi / args.N_theta
    grid = ReducedGrid(args.n, "disk", args.N_s, args.N_theta)
    for r in args.r:
        ref = None
        for m in args.phase_steps:
            res = shoot_connecting_orbit(args.n, args.epsilon, r, args.bisect_tol, N_s=args.N_s,
                                         N_theta=args.N_theta, phase=m * dth)
            (out / f"shoot_r{r:g}_p{m}.json").write_text(res.to_json())
            print(f"r={r:g} phase={m}*dtheta t*={res.t_star:.9f} plateau E={res.plateau_energy:.5f} "
                  f"[{res.plateau_start:.2f}, {res.plateau_end:.2f}] ({res.plateau_duration:.2f}) "
                  f"t_norm={res.normalization_time}")
            snaps = res.critical_trace.snapshots
            if ref is None:
                ref = (m, snaps)
                continue
            m0, s0 = ref
            shift = m - m0
            common = sorted(set(s0) & set(snaps))
            diff = max(float(np.max(np.abs(np.roll(grid.to_image(s0[t]), shift, axis=1) - grid.to_image(snaps[t]))))
                       for t in common)
            print(json.dumps({"rotation_check": {"shift": shift, "snapshots": len(common), "max_diff": diff}}))


if __name__ == "__main__":
    main()
