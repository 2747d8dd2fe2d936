import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sslab.core import (
    ComplexField,
    ConfigurationError,
    DomainError,
    Grid1D,
    SimConfig,
    SingularSystemError,
    dft,
    idft,
    make_noise,
    make_plane_wave,
    make_soliton,
    solve_cyclic_tridiagonal,
)


def dense_cyclic(diag, up, lo, c_tr, c_bl):
    n = len(diag)
    a = np.diag(diag).astype(complex) + np.diag(up, 1) + np.diag(lo, -1)
    a[0, n - 1] += c_tr
    a[n - 1, 0] += c_bl
    return a


class TestGrid:
    def test_points_and_spacing(self):
        g = Grid1D(40.0, 512)
        assert g.dx == 40 / 512
        assert g.points[0] == -20.0
        assert np.isclose(g.points[-1], 20 - g.dx)
        assert g.k_max == pytest.approx(math.pi / g.dx)

    def test_wavenumbers_shift_ascending(self):
        g = Grid1D(2 * np.pi, 16)
        k = np.fft.fftshift(g.wavenumbers)
        assert np.all(np.diff(k) > 0)
        assert k[0] == pytest.approx(-g.k_max)
        assert np.allclose(k, np.arange(-8, 8))

    @pytest.mark.parametrize("n", [0, -4, 7])
    def test_bad_n_rejected(self, n):
        with pytest.raises(ConfigurationError):
            Grid1D(1.0, n)

    def test_arrays_read_only(self):
        g = Grid1D(1.0, 8)
        with pytest.raises(ValueError):
            g.points[0] = 3.0


class TestComplexField:
    def test_values_copied_and_frozen(self):
        g = Grid1D(1.0, 4)
        v = np.ones(4)
        f = ComplexField(g, v)
        v[0] = 5
        assert f.values[0] == 1
        with pytest.raises(ValueError):
            f.values[1] = 2

    def test_shape_mismatch(self):
        with pytest.raises(ConfigurationError):
            ComplexField(Grid1D(1.0, 4), np.ones(6))

    def test_norm_of_constant(self):
        g = Grid1D(10.0, 100)
        assert ComplexField(g, np.full(100, 2.0)).norm() == pytest.approx(2 * math.sqrt(10))

    def test_add_requires_same_grid(self):
        a = ComplexField(Grid1D(1.0, 4), np.ones(4))
        b = ComplexField(Grid1D(2.0, 4), np.ones(4))
        with pytest.raises(ConfigurationError):
            a + b
        assert np.all((a + a).values == 2)
        assert np.all((3 * a).values == 3)


@settings(max_examples=40, deadline=None)
@given(n=st.sampled_from([2, 8, 30, 64]), seed=st.integers(0, 2**31 - 1))
def test_parseval_and_roundtrip(n, seed):
    r = np.random.default_rng(seed)
    g = Grid1D(3.0, n)
    u = ComplexField(g, r.standard_normal(n) + 1j * r.standard_normal(n))
    s = dft(u)
    assert np.sum(np.abs(u.values) ** 2) == pytest.approx(np.sum(np.abs(s.coefficients) ** 2) / n, rel=1e-12)
    assert np.allclose(idft(s).values, u.values, atol=1e-13)


def test_dft_of_single_mode():
    g = Grid1D(2 * np.pi, 32)
    u = ComplexField(g, np.exp(3j * (g.points - g.points[0])))
    c = dft(u).coefficients
    j = int(np.argmax(np.abs(c)))
    assert g.wavenumbers[j] == pytest.approx(3.0)
    assert abs(c[j]) == pytest.approx(32)


class TestCyclicSolver:
    @settings(max_examples=60, deadline=None)
    @given(n=st.integers(3, 64), seed=st.integers(0, 2**31 - 1), cplx=st.booleans())
    def test_matches_dense_oracle(self, n, seed, cplx):
        r = np.random.default_rng(seed)

        def rand(size):
            x = r.uniform(-1, 1, size)
            return x + 1j * r.uniform(-1, 1, size) if cplx else x

        up, lo = rand(n - 1), rand(n - 1)
        c_tr, c_bl = rand(2)
        diag = rand(n) + 4.5 * np.sign(r.uniform(-1, 1, n))
        rhs = rand(n)
        x = solve_cyclic_tridiagonal(diag, up, (c_tr, c_bl), rhs, lower=lo)
        ref = np.linalg.solve(dense_cyclic(diag, up, lo, c_tr, c_bl), rhs)
        assert np.linalg.norm(x - ref) <= 1e-11 * np.linalg.norm(ref)

    def test_scalar_broadcast_crank_nicolson_form(self):
        n = 50
        a = 0.3j
        rhs = np.arange(n) + 0j
        x = solve_cyclic_tridiagonal(1 - 2 * a, a, a, rhs)
        ref = np.linalg.solve(dense_cyclic(np.full(n, 1 - 2 * a), np.full(n - 1, a), np.full(n - 1, a), a, a), rhs)
        assert np.allclose(x, ref, rtol=1e-12, atol=1e-12)

    def test_multiple_rhs(self):
        n = 20
        rhs = np.random.default_rng(3).standard_normal((n, 3))
        x = solve_cyclic_tridiagonal(4.0, 1.0, 1.0, rhs)
        a = dense_cyclic(np.full(n, 4.0), np.ones(n - 1), np.ones(n - 1), 1.0, 1.0)
        assert np.allclose(a @ x, rhs, atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2])
    def test_tiny_systems(self, n):
        x = solve_cyclic_tridiagonal(np.full(n, 3.0), np.full(n - 1, 1.0), 0.5, np.ones(n))
        a = dense_cyclic(np.full(n, 3.0), np.ones(n - 1), np.ones(n - 1), 0.5, 0.5)
        assert np.allclose(a @ x, np.ones(n))

    def test_singular_periodic_laplacian(self):
        # rows sum to zero: constant vector spans the null space
        with pytest.raises(SingularSystemError) as info:
            solve_cyclic_tridiagonal(-2.0, 1.0, 1.0, np.ones(16))
        assert info.value.condition is None or info.value.condition > 1e12


class TestFactories:
    def test_soliton_profile(self):
        g = Grid1D(40.0, 512)
        u = make_soliton(g, 1.0, -1.0, 2.0)
        assert u.values[256] == pytest.approx(1.0)
        assert np.allclose(u.values[1:257], u.values[-1:255:-1])
        assert np.max(np.abs(u.values)) == pytest.approx(1.0)

    @pytest.mark.parametrize("A,beta,gamma", [(1.0, -1.0, 2.0), (0.7, -2.0, 1.0), (1.5, -0.5, 3.0)])
    def test_soliton_peak_and_width(self, A, beta, gamma):
        g = Grid1D(60.0, 1024)
        u = make_soliton(g, A, beta, gamma)
        assert np.max(np.abs(u.values)) == pytest.approx(A * math.sqrt(2 / gamma))
        x = g.points
        assert np.allclose(np.abs(u.values), A * math.sqrt(2 / gamma) / np.cosh(A * x / math.sqrt(-beta)))

    def test_soliton_wraps(self):
        g = Grid1D(40.0, 400)
        a = make_soliton(g, 1.0, -1.0, 2.0, x0=19.0)
        b = make_soliton(g, 1.0, -1.0, 2.0, x0=-21.0)
        assert np.allclose(a.values, b.values)
        assert abs(g.points[np.argmax(np.abs(a.values))] - 19.0) < g.dx

    def test_soliton_needs_negative_beta(self):
        with pytest.raises(DomainError):
            make_soliton(Grid1D(1.0, 8), 1.0, 1.0, 2.0)

    def test_plane_wave(self):
        u = make_plane_wave(Grid1D(1.0, 8), 2.0, 4.0)
        assert np.allclose(u.values, 1.0)

    def test_noise_deterministic_and_scaled(self):
        g = Grid1D(1.0, 200000)
        a = make_noise(g, 1e-3, seed=7)
        b = make_noise(g, 1e-3, seed=7)
        assert np.array_equal(a.values, b.values)
        assert np.std(a.values.real) == pytest.approx(1e-3 / math.sqrt(2), rel=0.02)
        assert np.std(a.values.imag) == pytest.approx(1e-3 / math.sqrt(2), rel=0.02)
        assert np.sqrt(np.mean(np.abs(a.values) ** 2)) == pytest.approx(1e-3, rel=0.02)

    def test_real_noise(self):
        v = make_noise(Grid1D(1.0, 1000), 1.0, seed=1, complex_noise=False).values
        assert np.all(v.imag == 0)

    def test_different_seeds_differ(self):
        g = Grid1D(1.0, 16)
        assert not np.array_equal(make_noise(g, 1.0, 1).values, make_noise(g, 1.0, 2).values)


class TestSimConfig:
    def test_dt_from_C(self):
        c = SimConfig(ratio_C=1.05)
        assert c.dt == pytest.approx(math.sqrt(1.05) * 40 / 512)
        assert c.grid.n_points == 512

    def test_C_from_dt(self):
        c = SimConfig(dt=0.05)
        assert c.ratio_C == pytest.approx((0.05 / (40 / 512)) ** 2)

    def test_inconsistent(self):
        with pytest.raises(ConfigurationError):
            SimConfig(dt=0.05, ratio_C=1.0)

    def test_neither(self):
        with pytest.raises(ConfigurationError):
            SimConfig()

    @pytest.mark.parametrize(
        "kw",
        [
            {"method": "rk4"},
            {"boundary": "open"},
            {"splitting": "third"},
            {"method": "spectral", "boundary": "dirichlet_zero"},
            {"gamma": 0.0},
            {"n_points": 511},
            {"noise_std": -1.0},
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ConfigurationError):
            SimConfig(ratio_C=1.0, **kw)

    def test_replace_rederives(self):
        c = SimConfig(ratio_C=1.0)
        d = c.replace(n_points=1024)
        assert d.ratio_C == pytest.approx(1.0)
        assert d.dt == pytest.approx(c.dt / 2)
        e = c.replace(dt=0.01)
        assert e.ratio_C == pytest.approx((0.01 / c.grid.dx) ** 2)

    def test_n_steps(self):
        c = SimConfig(dt=0.1, t_final=10.0)
        assert c.n_steps == 100
