"""Command-line entry point: ``sslab {simulate,growth,eigen,wkb,thresholds}``.

Exit codes: 0 success, 2 configuration error, 3 simulation blow-up,
4 eigensolver non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import load_config, sim_config, sim_config_dict
from .core import ConfigurationError, DomainError, make_noise, make_soliton
from .diagnostics import band_history, growth_rate, growth_rate_fit, spectrum, track_drift
from .eigen import EigenProblem, growth_rate_physical, peak_outside_core, solve_smallest, symmetry_check
from .linear_theory import threshold_fd_planewave, threshold_fd_soliton, threshold_ssm_spectral
from .solvers import run_split_step
from .wkb import WKBParams, hypothesize_C_cr, n_of_D_closed_form, n_of_D_integral, predict_birth_values

logger = logging.getLogger("sslab")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_NOCONV = 4


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


class OutputDir:
    """Writes files atomically and records them for the manifest."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.outputs: list[str] = []

    def _atomic(self, rel, text):
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        if rel not in self.outputs:
            self.outputs.append(str(rel))
        return path

    def csv(self, rel, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        return self._atomic(rel, buf.getvalue())

    def json(self, rel, obj):
        return self._atomic(rel, json.dumps(obj, indent=2, default=_json_default) + "\n")

    def manifest(self, command, config, seed):
        data = {
            "command": command,
            "config": config,
            "seed": seed,
            "versions": f"sslab {__version__}; numpy {np.__version__}; scipy {scipy.__version__}",
            "outputs": list(self.outputs) + ["manifest.json"],
        }
        self._atomic("manifest.json", json.dumps(data, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("SSLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigurationError(f"SSLAB_THREADS must be an integer, got {env!r}") from None
    return 1


def _sections(args):
    sections = load_config(args.config) if args.config else load_config("fig2")
    if args.seed is not None:
        sections["simulation"]["rng_seed"] = args.seed
    return sections


def _initial_field(cfg):
    u0 = make_soliton(cfg.grid, cfg.amplitude_A, cfg.beta, cfg.gamma)
    u0 = u0 + make_noise(cfg.grid, cfg.noise_std, cfg.rng_seed, cfg.noise_complex)
    if cfg.boundary == "dirichlet_zero":
        v = np.array(u0.values)
        v[0] = 0
        u0 = u0.with_values(v)
    return u0


def cmd_simulate(args) -> int:
    sections = _sections(args)
    cfg = sim_config(sections)
    run = run_split_step(cfg, _initial_field(cfg))
    out = OutputDir(args.out)
    x = cfg.grid.points
    for i, (t, row) in enumerate(zip(run.times, run.data)):
        out.csv(f"snapshots/u_{i:05d}.csv", ["x", "re_u", "im_u"], zip(x, row.real, row.imag))
        k, mag = spectrum(run.snapshot(i), t).shifted()
        out.csv(f"spectra/spectrum_{i:05d}.csv", ["k", "abs_u_hat"], zip(k, mag))
    out.csv("snapshot_times.csv", ["index", "time"], enumerate(run.times))
    t, bmax = band_history(run)
    out.csv("band_history.csv", ["time", "band_max"], zip(t, bmax))
    if cfg.beta < 0:
        dr = track_drift(run)
        out.csv("soliton_center.csv", ["time", "center"], zip(dr.times, dr.centers))
    summary = {"steps": cfg.n_steps, "wall_time": run.wall_time, "blowup": None}
    if run.blowup is not None:
        b = run.blowup
        summary["blowup"] = {"step": b.step, "time": b.time, "max_abs": b.max_abs, "reason": b.reason}
    out.json("summary.json", summary)
    out.manifest("simulate", sim_config_dict(cfg), cfg.rng_seed)
    if run.blowup is not None:
        print(f"blow-up at t={run.blowup.time:.6g}: {run.blowup.reason}", file=sys.stderr)
        return EXIT_BLOWUP
    return EXIT_OK


def growth_point(sections, n_points, C):
    """Simulation and eigenproblem growth rates at one (N, C); never raises."""
    row = {"n_points": n_points, "C": C, "lambda_sim": math.nan, "lambda_sim_fit": math.nan,
           "lambda_eig": math.nan, "status": "ok"}
    g = sections["growth"]
    try:
        cfg = sim_config(sections, n_points=n_points, ratio_C=C)
        run = run_split_step(cfg, _initial_field(cfg))
        row["lambda_sim"] = growth_rate(run, g["k_band"]).rate
        try:
            row["lambda_sim_fit"] = growth_rate_fit(run, g["k_band"])
        except ValueError:
            pass
        if run.blowup is not None:
            row["status"] = "blowup"
        prob = EigenProblem.from_C(C, cfg.grid.dx / 2, length_L=cfg.length_L, dX=g["dX"],
                                   beta=cfg.beta, A=cfg.amplitude_A)
        rep = solve_smallest(prob, g["count"], auto_shift=True)
        lam = growth_rate_physical(rep)
        row["lambda_eig"] = math.nan if lam is None else lam
        if not rep.converged:
            row["status"] = "eigen_not_converged"
    except Exception as exc:  # noqa: BLE001 - per-point failures are recorded
        row["status"] = f"error: {type(exc).__name__}: {exc}".replace("\n", " ")
    return row


def cmd_growth(args) -> int:
    sections = _sections(args)
    g = sections["growth"]
    points = [(n, C) for n in g["n_points_values"] for C in g["C_values"]]
    workers = _threads(args)
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(growth_point, [sections] * len(points), *zip(*points)))
    else:
        rows = [growth_point(sections, n, C) for n, C in points]
    out = OutputDir(args.out)
    cols = ["n_points", "C", "lambda_sim", "lambda_sim_fit", "lambda_eig", "status"]
    out.csv("growth.csv", cols, ([r[c] for c in cols] for r in rows))
    out.manifest("growth", {"simulation": sim_config_dict(sim_config(sections)), "growth": g},
                 sections["simulation"].get("rng_seed", 0))
    return EXIT_OK


def _eigen_problem(sections):
    e = sections["eigen"]
    cfg = sim_config(sections)
    if "D" in e and "C" in e:
        raise ConfigurationError("give D or C in [eigen], not both")
    eps = e.get("epsilon", cfg.grid.dx / 2)
    kw = dict(length_L=cfg.length_L, dX=e["dX"], beta=cfg.beta, A=cfg.amplitude_A,
              shift_Lambda0=complex(e["Lambda0_re"], e["Lambda0_im"]))
    if "C" in e:
        return EigenProblem.from_C(e["C"], eps, **kw)
    if "D" not in e:
        raise ConfigurationError("[eigen] needs D or C")
    return EigenProblem(e["D"], eps, **kw)


def cmd_eigen(args) -> int:
    sections = _sections(args)
    e = sections["eigen"]
    prob = _eigen_problem(sections)
    rep = solve_smallest(prob, e["count"], auto_shift=e["auto_shift"])
    sym = symmetry_check(rep)
    out = OutputDir(args.out)
    data = rep.to_dict()
    dom = rep.dominant_pair
    data["unstable_mode"] = dom is not None
    data["status"] = "dominant localized real mode found" if dom is not None else "no unstable mode"
    data["growth_rate_physical"] = growth_rate_physical(rep)
    data["dominant_outside_core"] = peak_outside_core(rep) if dom is not None else None
    data["symmetry"] = {"passed": sym.passed, "checked": sym.checked, "inconclusive": sym.inconclusive,
                        "failures": [[str(a), str(b)] for a, b in sym.failures]}
    out.json("eigen_report.json", data)
    X = prob.X
    for i, p in enumerate(rep.pairs[: e["n_modes"]]):
        f1, f2 = p.mode
        out.csv(f"modes/mode_{i:02d}.csv", ["X", "re_phi1", "im_phi1", "re_phi2", "im_phi2"],
                zip(X, f1.real, f1.imag, f2.real, f2.imag))
    out.manifest("eigen", {"simulation": sim_config_dict(sim_config(sections)), "eigen": e}, None)
    print(data["status"])
    if not rep.converged:
        print("eigensolver did not converge; partial report written", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


def cmd_wkb(args) -> int:
    sections = _sections(args)
    w = sections["wkb"]
    cfg = sim_config(sections)
    params = WKBParams(cfg.beta, cfg.amplitude_A, cfg.length_L, cfg.grid.dx / 2)
    method = w["method"]
    if method not in ("integral", "closed_form"):
        raise ConfigurationError(f"[wkb] method must be integral or closed_form, got {method!r}")

    def n_of(D, nu):
        if method == "closed_form":
            return n_of_D_closed_form(D, nu, params).n_continuous
        return n_of_D_integral(D, nu, params).n_continuous

    Ds = np.linspace(w["D_min"], w["D_max"], w["D_count"]) if w["D_count"] > 0 else np.array([])
    rows = []
    for D in Ds:
        n1, n3 = n_of(D, 1), n_of(D, 3)
        rows.append((D, n1, n3, n1 - n3))
    out = OutputDir(args.out)
    out.csv("wkb_scan.csv", ["D", "n_nu1", "n_nu3", "difference"], rows)
    ns = range(w["n_min"], w["n_max"] + 1)
    births = []
    for nu in (1, 3):
        for n, D in zip(ns, predict_birth_values(ns, nu, params, method)):
            births.append((nu, n, D))
    out.csv("birth_values.csv", ["nu", "n", "D"], births)
    try:
        h = hypothesize_C_cr(params, method)
        hyp = {"status": h.status, "D_lo": h.D_lo, "D_hi": h.D_hi, "D_cross": h.D_cross, "C_cr": h.C_cr,
               "method": h.method}
    except ValueError as exc:
        hyp = {"status": "no crossing found", "detail": str(exc)}
    out.json("C_cr_hypothesis.json", hyp)
    out.manifest("wkb", {"simulation": sim_config_dict(cfg), "wkb": w}, None)
    return EXIT_OK


def cmd_thresholds(args) -> int:
    sections = _sections(args)
    cfg = sim_config(sections)
    dx = cfg.grid.dx
    vals = {
        "dx": dx,
        "dt": cfg.dt,
        "dt_max_spectral_planewave": threshold_ssm_spectral(cfg.beta, dx),
        "dt_max_fd_planewave": threshold_fd_planewave(cfg.beta, cfg.amplitude_A, dx),
    }
    try:
        Cs = threshold_fd_soliton(cfg.beta, cfg.amplitude_A)
        vals["C_threshold_fd_soliton"] = Cs
        vals["dt_threshold_fd_soliton"] = math.sqrt(Cs) * dx
    except DomainError:
        vals["C_threshold_fd_soliton"] = None
    for k, v in vals.items():
        print(f"{k} = {_fmt(v)}")
    if args.out:
        out = OutputDir(args.out)
        out.json("thresholds.json", vals)
        out.manifest("thresholds", sim_config_dict(cfg), None)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "growth": cmd_growth,
    "eigen": cmd_eigen,
    "wkb": cmd_wkb,
    "thresholds": cmd_thresholds,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="sslab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI file or bundled config name (default: fig2)")
        p.add_argument("--out", default=None if name == "thresholds" else "out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override rng_seed")
        p.add_argument("--threads", type=int, default=None, help="worker processes for scans")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
