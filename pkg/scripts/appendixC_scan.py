"""Real eigenvalues near Lambda = 0 across a D range, next to the WKB birth values.

Each row lists the real localized eigenvalues of the window at Lambda0 = 0 and
the continuous quantization indices n(nu=1), n(nu=3).
"""

import argparse

import numpy as np

from sslab.eigen import EigenProblem, solve_smallest
from sslab.wkb import hypothesize_C_cr, n_of_D_closed_form, predict_birth_values


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--D-min", type=float, default=0.0120)
    ap.add_argument("--D-max", type=float, default=0.0140)
    ap.add_argument("--count", type=int, default=11)
    args = ap.parse_args()
    print("WKB births (nu=1, n=28..32):", ", ".join(f"{D:.6f}" for D in predict_birth_values(range(28, 33), 1)))
    h = hypothesize_C_cr()
    print(f"C_cr hypothesis: D in [{h.D_lo:.5f}, {h.D_hi:.5f}], C_cr = {h.C_cr:.5f} ({h.status})")
    for D in np.linspace(args.D_min, args.D_max, args.count):
        rep = solve_smallest(EigenProblem(float(D), 40 / 1024), 24)
        reals = sorted((p.Lambda_R for p in rep.pairs if p.is_real and p.Lambda_R > 1e-10), reverse=True)
        n1 = n_of_D_closed_form(D, 1).n_continuous
        n3 = n_of_D_closed_form(D, 3).n_continuous
        shown = ", ".join(f"{v:.3e}" for v in reals[:3]) or "-"
        print(f"D={D:.5f}  n1={n1:7.3f}  n3={n3:7.3f}  real Lambda: {shown}")


if __name__ == "__main__":
    main()
