"""Acceptance gate: one recorded PASS/FAIL line per criterion.

Lines are printed in the terminal summary. Criteria with known shortfalls are
still asserted at their stated tolerance; they fail rather than being relaxed.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from sslab.core import ComplexField, SimConfig, make_noise
from sslab.diagnostics import band_history, growth_rate, growth_rate_fit, track_drift
from sslab.eigen import EigenProblem, growth_rate_physical, solve_smallest
from sslab.linear_theory import rescale_params, threshold_fd_planewave
from sslab.solvers import propagate_linearized_error
from sslab.wkb import hypothesize_C_cr, invert_n, n_difference, n_of_D_closed_form

from conftest import soliton_run

pytestmark = pytest.mark.slow

EPS = 40 / 1024
ROOT = Path(__file__).resolve().parent.parent


def band_growth(run, t_max):
    t, b = band_history(run)
    sel = t <= t_max + 1e-9
    return float(b[sel].max() / b[0]), t, b


def top_real(rep, count=2):
    reals = [p for p in rep.pairs if p.is_real and p.Lambda_R > 1e-10 and p.localization >= 0.5]
    return sorted((p.Lambda_R for p in reals), reverse=True)[:count]


class TestCriterion1:
    @pytest.mark.parametrize("C", [0.8, 0.9])
    def test_below_threshold(self, soliton_runs, acceptance, C):
        t0 = time.perf_counter()
        run = soliton_runs(C, 2000.0) if C == 0.8 else soliton_runs(C, 500.0)
        wall = run.wall_time
        g, _, _ = band_growth(run, 500.0)
        ok = acceptance(1, g < 100 and wall < 30,
                        f"C={C}: band growth over [0,500] = {g:.3g}x (< 100), run {wall:.1f}s")
        assert ok, time.perf_counter() - t0

    def test_above_threshold(self, soliton_runs, acceptance):
        run = soliton_runs(1.05, 2000.0)
        t, b = band_history(run)
        g = float(b[np.argmin(np.abs(t - 1400.0))] / b[0])
        # the 2000-unit run must also take < 30 s per 1400 units of time
        wall = run.wall_time * 1400 / 2000
        ok = acceptance(1, g >= 1e4 and wall < 30, f"C=1.05: band growth at t=1400 = {g:.3g}x (>= 1e4), ~{wall:.1f}s")
        assert ok


class TestCriterion2:
    @pytest.mark.parametrize("C", [0.5, 1.0, 2.0, 4.0])
    def test_negative_beta_no_growth(self, acceptance, C):
        # L = 4 puts the first nonzero mode (k = pi/2) outside the modulational band |k| < sqrt(2)
        cfg = SimConfig(beta=-1.0, length_L=4.0, n_points=64, ratio_C=C, t_final=200.0, snapshot_interval=1.0)
        v = make_noise(cfg.grid, 1e-10, 1).values
        run = propagate_linearized_error(cfg, "plane_wave", ComplexField(cfg.grid, v - v.mean()))
        F = np.abs(np.fft.fft(run.data, axis=1))
        pair = np.sqrt(F**2 + np.roll(F[:, ::-1], 1, axis=1) ** 2)[:, 1:]
        g_pair = float((pair.max(axis=0) / pair[0]).max())
        norms = np.linalg.norm(run.data, axis=1)
        g_norm = float(norms.max() / norms[0])
        ok = acceptance(2, g_pair < 10 and g_norm < 10,
                        f"beta=-1, C={C}: max amplification over t=200 per +-k pair {g_pair:.3g}, norm {g_norm:.3g}")
        assert ok

    def test_positive_beta_onset(self, acceptance):
        dx = 40 / 512
        th = threshold_fd_planewave(1.0, 1.0, dx)

        def unstable(dt):
            cfg = SimConfig(beta=1.0, dt=dt, t_final=200.0, snapshot_interval=200.0)
            run = propagate_linearized_error(cfg, "plane_wave", make_noise(cfg.grid, 1e-10, 1))
            return np.linalg.norm(run.data[-1]) / np.linalg.norm(run.data[0]) > 1e3

        lo, hi = 0.5 * th, 1.5 * th
        assert not unstable(lo) and unstable(hi)
        while hi - lo > 0.005 * th:
            mid = 0.5 * (lo + hi)
            lo, hi = (lo, mid) if unstable(mid) else (mid, hi)
        onset = 0.5 * (lo + hi)
        ok = acceptance(2, abs(onset / th - 1) <= 0.1,
                        f"beta=1: measured onset dt={onset:.5g}, theory {th:.5g} (ratio {onset / th:.4f}, +-10%)")
        assert ok


class TestCriterion3:
    def test_two_dominant_at_0170(self, eigen_report, acceptance):
        t0 = time.perf_counter()
        rep = eigen_report(0.017, auto_shift=False)
        wall = time.perf_counter() - t0
        top = top_real(rep)
        ok = len(top) == 2 and abs(top[0] / 1.5e-3 - 1) <= 0.1 and abs(top[1] / 1.4e-3 - 1) <= 0.1
        acceptance(3, ok, f"D=0.017: dominant real Lambda = {', '.join(f'{v:.4e}' for v in top)} "
                          f"(1.5e-3, 1.4e-3 +-10%), {wall:.1f}s")
        assert ok

    def test_degenerate_pair_at_0230(self, eigen_report, acceptance):
        rep = eigen_report(0.023, auto_shift=False)
        top = top_real(rep)
        rel = abs(top[0] - top[1]) / top[0] if len(top) == 2 else math.inf
        ok = rel < 5e-5
        acceptance(3, ok, f"D=0.023: dominant pair {', '.join(f'{v:.7e}' for v in top)}, "
                          f"relative split {rel:.2e} (< 5e-5 for five figures)")
        assert ok


class TestCriterion4:
    @pytest.mark.parametrize("D", [0.05, 0.2, 0.4])
    def test_real(self, eigen_report, acceptance, D):
        dom = eigen_report(D).dominant_pair
        ok = dom is not None and abs(dom.Lambda_I) < 1e-10
        im = dom.Lambda_I if dom is not None else math.nan
        re = dom.Lambda_R if dom is not None else math.nan
        acceptance(4, ok, f"D={D}: dominant Lambda = {re:.6g}, |Im| = {abs(im):.2e} (< 1e-10)")
        assert ok


def test_criterion5_grid_convergence(eigen_report, acceptance):
    a = top_real(eigen_report(0.05), 3)
    b = top_real(eigen_report(0.05, dX=0.05), 3)
    n = min(len(a), len(b))
    rel = max(abs(x - y) / abs(x) for x, y in zip(a[:n], b[:n])) if n else math.inf
    ok = n > 0 and rel < 5e-5
    acceptance(5, ok, f"D=0.05: dX=0.1 {['%.7g' % v for v in a[:n]]} vs dX=0.05 {['%.7g' % v for v in b[:n]]}, "
                      f"max rel diff {rel:.1e}")
    assert ok


_GROWTH = {}


def growth_point(N, C):
    if (N, C) not in _GROWTH:
        run = soliton_run(C, 1600.0, n_points=N, snapshot_interval=2.0)
        sim = growth_rate(run).rate
        fit = growth_rate_fit(run)
        rep = solve_smallest(EigenProblem.from_C(C, 40 / N / 2), 24, auto_shift=True)
        eig = growth_rate_physical(rep, rescale_params(-1.0, 1.0, C, 40 / N))
        _GROWTH[N, C] = (sim, fit, eig)
    return _GROWTH[N, C]


@pytest.mark.parametrize("N", [512, 1024])
@pytest.mark.parametrize("C", [1.05, 1.2, 1.4])
def test_criterion6_sim_vs_eigen(acceptance, N, C):
    sim, fit, eig = growth_point(N, C)
    rel = abs(sim / eig - 1)
    ok = rel <= 0.1
    acceptance(6, ok, f"N={N}, C={C}: single-spectrum rate {sim:.5g}, eigen {eig:.5g} (diff {rel:.1%}, <= 10%); "
                      f"log-slope fit {fit:.5g} (diff {abs(fit / eig - 1):.1%})")
    assert ok


def test_criterion7_wkb(acceptance):
    t0 = time.perf_counter()
    D0 = invert_n(0, 1, method="closed_form")
    checks = [abs(D0 / 5.9e-6 - 1) <= 0.02]
    lines = [f"n=0 birth D={D0:.4g} (5.9e-6 +-2%)"]
    for D, n1, diff in ((0.012134, 29.02, 0.99), (0.012928, 30.02, 1.02), (0.013750, 31.04, 1.05)):
        got_n = n_of_D_closed_form(D, 1).n_continuous
        got_d = n_difference(D)
        checks.append(abs(got_d - diff) <= 0.03)
        if D == 0.012134:
            checks.append(abs(got_n - n1) <= 0.05)
        lines.append(f"D={D}: n={got_n:.3f}, diff={got_d:.3f}")
    h = hypothesize_C_cr()
    checks.append(0.0121 <= h.D_lo and h.D_hi <= 0.0130)
    wall = time.perf_counter() - t0
    checks.append(wall < 5)
    lines.append(f"crossing in [{h.D_lo:.5g}, {h.D_hi:.5g}] (hypothesis C_cr={h.C_cr:.5g}), {wall:.2f}s")
    ok = all(checks)
    acceptance(7, ok, "; ".join(lines))
    assert ok


PROPERTY_NODES = [
    "tests/test_solvers.py::TestRunSplitStep::test_norm_conserved_per_step",
    "tests/test_solvers.py::TestFdPeriodic::test_direct_equals_multiplier",
    "tests/test_solvers.py::TestFdDirichlet::test_sine_path_equals_direct",
    "tests/test_eigen.py::TestDenseOracle::test_arpack_matches_dense",
    "tests/test_eigen.py::TestDenseOracle::test_full_spectrum_quadruplets",
    "tests/test_solvers.py::TestLinearizedPropagator::test_real_linearity",
    "tests/test_solvers.py::TestRunSplitStep::test_splitting_order",
]


def test_criterion8_property_suites(acceptance):
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_NODES],
                          cwd=ROOT, capture_output=True, text=True)
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0
    acceptance(8, ok, f"standalone property run: {summary}")
    assert ok, proc.stdout[-3000:]


def test_criterion9_drift(soliton_runs, acceptance):
    dx = 40 / 512
    fast = track_drift(soliton_runs(1.05, 2000.0))
    slow = track_drift(soliton_runs(0.8, 2000.0))
    late = (fast.times > 1400) & (fast.times <= 2000)
    d_fast = float(fast.displacement()[late].max()) if late.any() else math.nan
    d_slow = float(slow.displacement().max())
    ok = d_fast > 1.0 and d_slow < dx and not slow.truncated
    acceptance(9, ok, f"C=1.05 max displacement in (1400,2000] = {d_fast:.3g} (> 1 width); "
                      f"C=0.8 max displacement = {d_slow:.2e} (< dx = {dx:.4g})")
    assert ok
