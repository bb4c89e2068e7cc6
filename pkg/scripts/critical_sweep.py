"""Energies and nodal points of the Clifford and ground states along an eps continuation."""

import argparse
import math

from cliffordflow.critical import continuation_sweep, expected_clifford_energy, expected_ground_energy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--epsilon", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025])
    ap.add_argument("--N-s", type=int, default=2048)
    args = ap.parse_args()

    print(f"{'n':>2} {'state':>8} {'eps':>6} {'E / 2 sigma A':>14} {'nodal':>10} {'target':>10}")
    for n in args.n:
        for which, target in (("clifford", expected_clifford_energy(n)), ("ground", expected_ground_energy(n))):
            N = args.N_s if which == "clifford" else 2 * args.N_s
            s_star = math.atan(math.sqrt(n - 1)) if which == "clifford" else 0.0
            for st in continuation_sweep(n, args.epsilon, which, N_s=N):
                print(f"{n:>2} {which:>8} {st.eps:>6g} {st.energy / target:>14.6f} "
                      f"{st.nodal_points[0]:>10.6f} {s_star:>10.6f}")


if __name__ == "__main__":
    main()
