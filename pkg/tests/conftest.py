import numpy as np
import pytest

from sslab.core import SimConfig, make_noise, make_soliton
from sslab.solvers import run_split_step

ACCEPTANCE: dict[int, list[str]] = {}


def record(criterion: int, passed: bool, detail: str):
    ACCEPTANCE.setdefault(criterion, []).append(f"{'PASS' if passed else 'FAIL'}  {detail}")
    return passed


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        for line in ACCEPTANCE[c]:
            tr.write_line(f"criterion {c}: {line}")


def soliton_run(C, t_final, n_points=512, snapshot_interval=10.0, seed=0, **kw):
    cfg = SimConfig(ratio_C=C, n_points=n_points, t_final=t_final, snapshot_interval=snapshot_interval,
                    rng_seed=seed, **kw)
    u0 = make_soliton(cfg.grid, cfg.amplitude_A, cfg.beta, cfg.gamma)
    u0 = u0 + make_noise(cfg.grid, cfg.noise_std, cfg.rng_seed, cfg.noise_complex)
    return run_split_step(cfg, u0)


_RUNS = {}


@pytest.fixture(scope="session")
def soliton_runs():
    """Cached long soliton runs keyed by (C, N, t_final, interval)."""

    def get(C, t_final=2000.0, n_points=512, snapshot_interval=10.0):
        key = (C, n_points, t_final, snapshot_interval)
        if key not in _RUNS:
            _RUNS[key] = soliton_run(C, t_final, n_points, snapshot_interval)
        return _RUNS[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_EIGEN = {}


@pytest.fixture(scope="session")
def eigen_report():
    """Cached production-size eigen solves keyed by (D, epsilon, dX, auto_shift)."""
    from sslab.eigen import EigenProblem, solve_smallest

    def get(D, epsilon=40 / 1024, dX=0.1, auto_shift=True, count=24):
        key = (D, epsilon, dX, auto_shift, count)
        if key not in _EIGEN:
            _EIGEN[key] = solve_smallest(EigenProblem(D, epsilon, dX=dX), count, auto_shift=auto_shift)
        return _EIGEN[key]

    return get
