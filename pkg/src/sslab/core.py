"""Grids, complex fields, transforms, tridiagonal solves and initial conditions.

The grid places ``x_m = -L/2 + m*dx`` for ``m = 0..N-1`` so the left end point
is a sample and the right one is its periodic image. Wavenumbers use the
standard DFT ordering (``numpy.fft.fftfreq``); ``np.fft.fftshift`` maps them to
the ascending physical range ``-pi/dx <= k < pi/dx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import solve_banded

__all__ = [
    "ConfigurationError",
    "DomainError",
    "PreconditionError",
    "SingularSystemError",
    "Grid1D",
    "ComplexField",
    "Spectrum",
    "SimConfig",
    "dft",
    "idft",
    "solve_cyclic_tridiagonal",
    "make_soliton",
    "make_plane_wave",
    "make_noise",
]


class ConfigurationError(ValueError):
    """Inconsistent or invalid parameters."""


class DomainError(ValueError):
    """Parameters outside the domain where an object exists."""


class PreconditionError(ValueError):
    """Input violates an operation's precondition."""


class SingularSystemError(np.linalg.LinAlgError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on ``[-L/2, L/2)`` with an even number of points."""

    length: float
    n_points: int

    def __post_init__(self):
        if self.n_points <= 0 or self.n_points % 2:
            raise ConfigurationError(f"n_points must be a positive even integer, got {self.n_points}")
        if not self.length > 0:
            raise ConfigurationError(f"length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @cached_property
    def points(self) -> np.ndarray:
        x = -self.length / 2 + self.dx * np.arange(self.n_points)
        x.setflags(write=False)
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)
        k.setflags(write=False)
        return k

    @property
    def k_max(self) -> float:
        return math.pi / self.dx


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples ``u(x_m)`` on a grid. Values are copied and frozen."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.n_points,):
            raise ConfigurationError(
                f"field has shape {v.shape}, grid expects ({self.grid.n_points},)"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def norm(self) -> float:
        """Discrete L2 norm ``sqrt(sum |u_m|^2 dx)``."""
        return math.sqrt(self.grid.dx) * float(np.linalg.norm(self.values))

    def with_values(self, values) -> "ComplexField":
        return ComplexField(self.grid, values)

    def __add__(self, other):
        if isinstance(other, ComplexField):
            if other.grid != self.grid:
                raise ConfigurationError("cannot add fields on different grids")
            other = other.values
        return ComplexField(self.grid, self.values + other)

    def __mul__(self, scalar):
        return ComplexField(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Spectrum:
    """DFT coefficients (unnormalized forward transform) on ``grid.wavenumbers``."""

    grid: Grid1D
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        if c.shape != (self.grid.n_points,):
            raise ConfigurationError(
                f"spectrum has shape {c.shape}, grid expects ({self.grid.n_points},)"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def wavenumbers(self) -> np.ndarray:
        return self.grid.wavenumbers


def dft(u: ComplexField) -> Spectrum:
    """Forward DFT, ``u_hat_j = sum_m u_m exp(-i k_j (x_m - x_0))``.

    Parseval reads ``sum |u_m|^2 = sum |u_hat_j|^2 / N``.
    """
    return Spectrum(u.grid, np.fft.fft(u.values))


def idft(s: Spectrum) -> ComplexField:
    return ComplexField(s.grid, np.fft.ifft(s.coefficients))


def _dense_condition(diag, upper, lower, corner_tr, corner_bl):
    n = len(diag)
    if n > 2048:
        return None
    a = np.diag(np.asarray(diag, dtype=complex))
    a += np.diag(upper, 1) + np.diag(lower, -1)
    a[0, n - 1] += corner_tr
    a[n - 1, 0] += corner_bl
    return float(np.linalg.cond(a))


def solve_cyclic_tridiagonal(diag, off_diag, corner, rhs, lower=None):
    """Solve a tridiagonal system with periodic corner entries.

    The matrix has ``diag`` on the main diagonal, ``off_diag`` on the
    super-diagonal, ``lower`` (default: ``off_diag``) on the sub-diagonal and
    ``corner`` at positions ``(0, n-1)`` and ``(n-1, 0)``. ``corner`` may be a
    pair ``(top_right, bottom_left)``. Scalars broadcast.

    Uses the Sherman-Morrison correction on top of a banded LU solve.

    Raises
    ------
    SingularSystemError
        If the matrix is numerically singular; ``.condition`` holds a dense
        condition-number estimate when the system is small enough to form.
    """
    rhs = np.asarray(rhs)
    n = rhs.shape[0]
    dtype = np.result_type(diag, off_diag, corner, rhs, lower if lower is not None else 0.0, 1.0)
    d = np.broadcast_to(np.asarray(diag, dtype=dtype), (n,)).copy()
    up = np.broadcast_to(np.asarray(off_diag, dtype=dtype), (n - 1,)).copy()
    lo = up.copy() if lower is None else np.broadcast_to(np.asarray(lower, dtype=dtype), (n - 1,)).copy()
    if np.ndim(corner) == 0:
        c_tr = c_bl = dtype.type(corner)
    else:
        c_tr, c_bl = (dtype.type(c) for c in corner)

    if n < 3:
        a = np.diag(d) + np.diag(up, 1) + np.diag(lo, -1)
        a[0, n - 1] += c_tr
        a[n - 1, 0] += c_bl
        try:
            return np.linalg.solve(a, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(f"singular {n}x{n} cyclic system", math.inf) from exc

    # A = T' + u v^T with u = (g, 0.., c_bl), v = (1, 0.., c_tr/g)
    g = -d[0] if d[0] != 0 else dtype.type(1.0)
    tp = d.copy()
    tp[0] -= g
    tp[-1] -= c_bl * c_tr / g
    ab = np.zeros((3, n), dtype=dtype)
    ab[0, 1:] = up
    ab[1] = tp
    ab[2, :-1] = lo
    uvec = np.zeros(n, dtype=dtype)
    uvec[0] = g
    uvec[-1] = c_bl
    rhs_cols = np.column_stack([rhs.astype(dtype, copy=False), uvec]) if rhs.ndim == 1 else None
    try:
        if rhs_cols is not None:
            sol = solve_banded((1, 1), ab, rhs_cols, check_finite=False)
            y, z = sol[:, 0], sol[:, 1]
        else:
            y = solve_banded((1, 1), ab, rhs.astype(dtype, copy=False), check_finite=False)
            z = solve_banded((1, 1), ab, uvec, check_finite=False)
    except np.linalg.LinAlgError as exc:
        cond = _dense_condition(d, up, lo, c_tr, c_bl)
        raise SingularSystemError(f"cyclic tridiagonal system is singular (cond ~ {cond})", cond) from exc

    vz = z[0] + (c_tr / g) * z[-1]
    denom = 1.0 + vz
    scale = max(1.0, abs(vz))
    if not np.all(np.isfinite(z)) or abs(denom) <= 1e3 * np.finfo(float).eps * scale:
        cond = _dense_condition(d, up, lo, c_tr, c_bl)
        raise SingularSystemError(f"cyclic tridiagonal system is singular (cond ~ {cond})", cond)
    if rhs.ndim == 1:
        vy = y[0] + (c_tr / g) * y[-1]
        return y - (vy / denom) * z
    vy = y[0] + (c_tr / g) * y[-1]
    return y - np.outer(z, vy / denom)


def make_soliton(grid: Grid1D, A: float, beta: float, gamma: float, x0: float = 0.0) -> ComplexField:
    """Sample ``A sqrt(2/gamma) sech(A (x - x0) / sqrt(-beta))`` (phase at t=0).

    The profile is wrapped periodically when ``x0`` is off-centre.
    """
    if beta >= 0:
        raise DomainError(f"bright solitons require beta < 0, got beta={beta}")
    if gamma <= 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    L = grid.length
    xs = (grid.points - x0 + L / 2) % L - L / 2
    arg = A * xs / math.sqrt(-beta)
    return ComplexField(grid, A * math.sqrt(2.0 / gamma) / np.cosh(arg))


def make_plane_wave(grid: Grid1D, A: float, gamma: float) -> ComplexField:
    if gamma <= 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    return ComplexField(grid, np.full(grid.n_points, A / math.sqrt(gamma), dtype=complex))


def make_noise(grid: Grid1D, std: float, seed: int, complex_noise: bool = True) -> ComplexField:
    """Zero-mean Gaussian noise with per-sample standard deviation ``std``.

    Complex noise is circular: real and imaginary parts are independent with
    standard deviation ``std/sqrt(2)`` each. Samples come from numpy's PCG64
    bit generator seeded with ``seed``.
    """
    if std < 0:
        raise ConfigurationError(f"noise std must be >= 0, got {std}")
    rng = np.random.Generator(np.random.PCG64(seed))
    n = grid.n_points
    if complex_noise:
        z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * (std / math.sqrt(2.0))
    else:
        z = rng.standard_normal(n) * std + 0j
    return ComplexField(grid, z)


_BOUNDARIES = ("periodic", "dirichlet_zero")
_SPLITTINGS = ("first_order", "strang")
_METHODS = ("fd", "spectral")


@dataclass(frozen=True)
class SimConfig:
    """Physical and numerical parameters of one split-step run.

    Give either ``dt`` or ``ratio_C`` = (dt/dx)^2; the other is derived. If both
    are given they must agree.
    """

    beta: float = -1.0
    gamma: float = 2.0
    amplitude_A: float = 1.0
    length_L: float = 40.0
    n_points: int = 512
    dt: float | None = None
    ratio_C: float | None = None
    method: str = "fd"
    boundary: str = "periodic"
    splitting: str = "first_order"
    noise_std: float = 1e-10
    noise_complex: bool = True
    rng_seed: int = 0
    t_final: float = 100.0
    snapshot_interval: float = 10.0
    blowup_factor: float = 1e6
    grid: Grid1D = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        grid = Grid1D(float(self.length_L), int(self.n_points))
        object.__setattr__(self, "grid", grid)
        if self.gamma <= 0:
            raise ConfigurationError(f"gamma must be positive, got {self.gamma}")
        if self.method not in _METHODS:
            raise ConfigurationError(f"method must be one of {_METHODS}, got {self.method!r}")
        if self.boundary not in _BOUNDARIES:
            raise ConfigurationError(f"boundary must be one of {_BOUNDARIES}, got {self.boundary!r}")
        if self.splitting not in _SPLITTINGS:
            raise ConfigurationError(f"splitting must be one of {_SPLITTINGS}, got {self.splitting!r}")
        if self.method == "spectral" and self.boundary != "periodic":
            raise ConfigurationError("the spectral dispersive step needs periodic boundaries")
        dx = grid.dx
        if self.dt is None and self.ratio_C is None:
            raise ConfigurationError("one of dt or ratio_C must be given")
        if self.dt is None:
            if self.ratio_C <= 0:
                raise ConfigurationError(f"ratio_C must be positive, got {self.ratio_C}")
            object.__setattr__(self, "dt", math.sqrt(self.ratio_C) * dx)
        elif self.ratio_C is None:
            object.__setattr__(self, "ratio_C", (self.dt / dx) ** 2)
        elif not math.isclose(self.ratio_C, (self.dt / dx) ** 2, rel_tol=1e-9):
            raise ConfigurationError(
                f"dt={self.dt} and ratio_C={self.ratio_C} disagree: (dt/dx)^2={(self.dt / dx) ** 2}"
            )
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.noise_std < 0:
            raise ConfigurationError("noise_std must be >= 0")
        if self.t_final < 0 or not self.snapshot_interval > 0:
            raise ConfigurationError("t_final must be >= 0 and snapshot_interval > 0")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def r(self) -> float:
        """Dispersive step ratio dt/dx^2."""
        return self.dt / self.grid.dx**2

    def replace(self, **changes) -> "SimConfig":
        """Copy with changes; changing one of dt/ratio_C/grid re-derives the other."""
        kw = {f: getattr(self, f) for f in self.__dataclass_fields__ if f != "grid"}
        kw.update(changes)
        touches_grid = "length_L" in changes or "n_points" in changes
        if "dt" in changes and "ratio_C" not in changes:
            kw["ratio_C"] = None
        elif "ratio_C" in changes and "dt" not in changes:
            kw["dt"] = None
        elif touches_grid and "dt" not in changes:
            kw["dt"] = None
        return SimConfig(**kw)
