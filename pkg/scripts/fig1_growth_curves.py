"""Plane-wave growth rate versus k for fd and spectral split-step, both signs of beta.

Writes one CSV per case into --out (default ``out/fig1``).
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from sslab.linear_theory import planewave_growth_curve, threshold_fd_planewave, threshold_ssm_spectral

DX = 40 / 512


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/fig1")
    ap.add_argument("--A", type=float, default=1.0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    cases = {
        "fd_beta+1_1.2xthreshold": ("fd", 1.0, 1.2 * threshold_fd_planewave(1.0, args.A, DX)),
        "fd_beta-1_C4": ("fd", -1.0, 2.0 * DX),
        "spectral_beta-1_3xthreshold": ("spectral", -1.0, 3 * threshold_ssm_spectral(-1.0, DX)),
    }
    k = np.linspace(0, np.pi / DX, 2001)
    for name, (method, beta, dt) in cases.items():
        k, rate = planewave_growth_curve(method, beta, 2.0, args.A, dt, DX, k)
        with open(out / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "growth_rate"])
            w.writerows(zip(k, rate))
        print(f"{name}: dt={dt:.5g}, max rate {rate.max():.4g} at k={k[np.argmax(rate)]:.4g}")


if __name__ == "__main__":
    main()
