"""d(n), a(n) and the least-area Clifford hypersurface per dimension, plus the appendix checks."""

import argparse
import json
import math

from cliffordflow.geometry import A_CLOSED_FORMS, density_ratio, min_clifford, min_ratio, verify_appendices


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=200)
    ap.add_argument("--show", type=int, default=12, help="rows to print")
    args = ap.parse_args()

    print(f"{'n':>4} {'d(n)':>18} {'a(n)':>18} {'T_min':>8} {'closed form':>18}")
    for n in range(2, args.show + 2):
        spec, _ = min_clifford(n)
        cf = A_CLOSED_FORMS.get(n)
        print(f"{n:>4} {density_ratio(n):>18.15f} {min_ratio(n):>18.15f} {f'({spec.p},{spec.q})':>8} "
              f"{'' if cf is None else f'{cf:.15f}':>18}")
    print(f"limits: d -> sqrt(2 pi / e) = {math.sqrt(2 * math.pi / math.e):.15f}, a -> sqrt 2 = {math.sqrt(2):.15f}")
    rep = verify_appendices(args.n_max)
    print(json.dumps({"checks": rep.checks, "failures": rep.failures[:10], "pass": rep.passed}, indent=2))


if __name__ == "__main__":
    main()
