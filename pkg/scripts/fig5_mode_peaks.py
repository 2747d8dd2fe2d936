"""Peak position and eigenvalue of the dominant localized mode versus D."""

import argparse

from sslab.eigen import EigenProblem, peak_outside_core, solve_smallest


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--D", type=float, nargs="+", default=[0.05, 0.1, 0.2, 0.4])
    ap.add_argument("--epsilon", type=float, default=40 / 1024)
    args = ap.parse_args()
    print(f"{'D':>8} {'Lambda':>12} {'|X_peak|':>9} {'x_peak':>8} outside_core")
    for D in args.D:
        rep = solve_smallest(EigenProblem(D, args.epsilon), 24, auto_shift=True)
        dom = rep.dominant_pair
        if dom is None:
            print(f"{D:8.4f} {'none':>12}")
            continue
        xp = abs(dom.peak_X) * args.epsilon
        print(f"{D:8.4f} {dom.Lambda_R:12.6g} {abs(dom.peak_X):9.2f} {xp:8.3f} {peak_outside_core(rep)}")


if __name__ == "__main__":
    main()
