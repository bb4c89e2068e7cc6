"""Morse index, nullity and the location of the near-zero cluster per n and eps.

The cluster half-width delta and the largest |lambda| inside it are printed so
the collapse of the cluster as eps decreases can be read off; no rate is fitted.
"""

import argparse

import numpy as np

from cliffordflow.critical import solve_clifford_state, solve_ground_state
from cliffordflow.grids import ReducedGrid
from cliffordflow.spectrum import morse_count


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 4, 5])
    ap.add_argument("--epsilon", type=float, nargs="+", default=[0.1, 0.05, 0.025])
    ap.add_argument("--N-s", type=int, default=2048)
    ap.add_argument("--ground", action="store_true", help="ground states instead of Clifford states")
    args = ap.parse_args()

    print(f"{'n':>2} {'eps':>6} {'index':>5} {'null':>4} {'delta':>10} {'max|cluster|':>12} {'gap':>8}")
    for n in args.n:
        for eps in args.epsilon:
            if args.ground:
                st = solve_ground_state(n, eps, grid=ReducedGrid(n, "latitude_alpha", 2 * args.N_s))
            else:
                st = solve_clifford_state(n, eps, grid=ReducedGrid(n, "latitude_s", args.N_s))
            sp = morse_count(st)
            ev = np.concatenate([m.eigenvalues for m in sp.modes])
            inside = np.abs(ev[np.abs(ev) <= sp.delta])
            top = inside.max() if inside.size else float("nan")
            print(f"{n:>2} {eps:>6g} {sp.morse_index:>5} {sp.nullity:>4} {sp.delta:>10.3e} {top:>12.3e} "
                  f"{sp.gap_ratio:>8.1f}")


if __name__ == "__main__":
    main()
