"""Bohr-Sommerfeld quantization of the zero-eigenvalue problem on the soliton tail.

At Lambda = 0 the eigenproblem splits into two scalar equations
``phi'' + (D - nu V(eps X)) phi = 0`` with ``nu = 1`` and ``nu = 3``. Treating
the quantum number ``n`` of

    2 int_{X_right}^{X_edge} sqrt(D - nu V(eps X)) dX = pi (n + 1/2)

as a continuous function of D, a real mode is born or dies at Lambda = 0
whenever ``n(D)`` passes an integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .core import DomainError
from .linear_theory import C_from_D

__all__ = [
    "WKBParams",
    "WKBQuantization",
    "TurningPoint",
    "CcrHypothesis",
    "NoTurningPoint",
    "turning_point",
    "n_of_D_integral",
    "n_of_D_closed_form",
    "invert_n",
    "predict_birth_values",
    "n_difference",
    "hypothesize_C_cr",
]

NUS = (1, 3)


class NoTurningPoint(DomainError):
    """D lies outside (0, nu * V_amplitude]; the integrand has no root."""


@dataclass(frozen=True)
class WKBParams:
    """Soliton and grid parameters entering the quantization condition."""

    beta: float = -1.0
    A: float = 1.0
    length_L: float = 40.0
    epsilon: float = 40.0 / 1024

    @property
    def y_edge(self) -> float:
        """Half the domain in y = eps X = A x / sqrt(-beta)."""
        return self.A / math.sqrt(-self.beta) * self.length_L / 2

    @property
    def X_edge(self) -> float:
        return self.y_edge / self.epsilon

    def C(self, D) -> float:
        return C_from_D(D, self.beta, self.A)

    def V_amplitude(self, D) -> float:
        return 2 * self.C(D) * self.beta**2


@dataclass(frozen=True)
class TurningPoint:
    X_exact: float
    X_exponential: float


@dataclass(frozen=True)
class WKBQuantization:
    D: float
    nu: int
    n_continuous: float
    X_turning: float
    method: str


@dataclass(frozen=True)
class CcrHypothesis:
    """First D where n(nu=1) - n(nu=3) exceeds 1. A conjecture, not a verified threshold."""

    D_lo: float
    D_hi: float
    D_cross: float
    C_cr: float
    method: str
    status: str = "hypothesis"


def _check_nu(nu):
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")


def turning_point(D, nu, params: WKBParams = WKBParams()) -> TurningPoint:
    """Right turning point of D - nu V(eps X) = 0, exact and exponential-tail forms."""
    _check_nu(nu)
    V0 = params.V_amplitude(D)
    if not 0 < D <= nu * V0:
        raise NoTurningPoint(f"need 0 < D <= nu*V0 = {nu * V0}, got D = {D}")
    eps = params.epsilon
    x_exp = math.log(4 * nu * V0 / D) / (2 * eps)
    if D == nu * V0:
        return TurningPoint(0.0, x_exp)

    def f(y):
        return D - nu * V0 / math.cosh(y) ** 2

    hi = 1.0
    while f(hi) < 0:
        hi *= 2
    y = brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return TurningPoint(y / eps, x_exp)


def _action(D, nu, params, potential):
    """2 int_{y_r}^{y_edge} sqrt(D - nu V(y)) dy, in y units."""
    V0 = params.V_amplitude(D)
    tp = turning_point(D, nu, params)
    if potential == "sech":
        y_r = tp.X_exact * params.epsilon

        def V(y):
            return V0 / np.cosh(y) ** 2

    elif potential == "exponential":
        y_r = tp.X_exponential * params.epsilon

        def V(y):
            return 4 * V0 * np.exp(-2 * y)

    else:
        raise ValueError(f"unknown potential {potential!r}")
    span = params.y_edge - y_r
    if span <= 0:
        raise NoTurningPoint("turning point lies outside the domain")

    # y = y_r + t^2 removes the square-root endpoint singularity
    def g(t):
        return 2 * t * math.sqrt(max(D - nu * V(y_r + t * t), 0.0))

    val, _ = quad(g, 0.0, math.sqrt(span), epsabs=0, epsrel=1e-12, limit=200)
    return 2 * val, y_r


def n_of_D_integral(D, nu, params: WKBParams = WKBParams(), potential="sech") -> WKBQuantization:
    """Continuous quantization index from the action integral.

    ``potential="sech"`` uses the exact profile; ``"exponential"`` replaces it
    by its tail ``4 V0 exp(-2y)``.
    """
    _check_nu(nu)
    S, y_r = _action(D, nu, params, potential)
    n = S / (params.epsilon * math.pi) - 0.5
    return WKBQuantization(D, nu, n, y_r / params.epsilon, f"integral:{potential}")


def n_of_D_closed_form(D, nu, params: WKBParams = WKBParams()) -> WKBQuantization:
    """Closed form of the exponential-tail action, neglecting O(exp(-(L - 2 y_r))) terms.

    ``sqrt(D) (L_eff - ln(8 nu C beta^2 / D) - 2 (1 - ln 2)) = eps pi (n + 1/2)``
    with ``L_eff = 2 y_edge`` and ``C = C(D)``.
    """
    _check_nu(nu)
    if not D > 0:
        raise DomainError(f"D must be positive, got {D}")
    C = params.C(D)
    log_term = math.log(8 * nu * C * params.beta**2 / D)
    bracket = 2 * params.y_edge - log_term - 2 * (1 - math.log(2))
    if bracket <= 0:
        raise DomainError("domain too small for this D: nonpositive bracket")
    n = math.sqrt(D) * bracket / (params.epsilon * math.pi) - 0.5
    return WKBQuantization(D, nu, n, log_term / (2 * params.epsilon), "closed_form")


def _n_func(method, nu, params):
    if method == "closed_form":
        return lambda D: n_of_D_closed_form(D, nu, params).n_continuous
    if method in ("integral", "sech"):
        return lambda D: n_of_D_integral(D, nu, params, "sech").n_continuous
    if method == "exponential":
        return lambda D: n_of_D_integral(D, nu, params, "exponential").n_continuous
    raise ValueError(f"unknown method {method!r}")


def invert_n(n, nu, params: WKBParams = WKBParams(), method="integral", D_lo=1e-9, D_hi=0.5):
    """D at which n(D) equals ``n``, by bracketing root search."""
    f = _n_func(method, nu, params)

    def h(D):
        try:
            return f(D) - n
        except DomainError:
            return -n - 1.0

    if h(D_hi) < 0:
        raise ValueError(f"n={n} not reached below D={D_hi}")
    lo = D_lo
    while h(lo) > 0:
        lo /= 10
        if lo < 1e-300:
            raise ValueError("could not bracket the root")
    return brentq(h, lo, D_hi, xtol=1e-14, rtol=1e-12, maxiter=500)


def predict_birth_values(n_range, nu, params: WKBParams = WKBParams(), method="integral"):
    """D values where n(D) is an integer, for each n in ``n_range``."""
    out = []
    for n in n_range:
        if int(n) != n or n < 0:
            raise ValueError(f"n must be a nonnegative integer, got {n}")
        out.append(invert_n(n, nu, params, method))
    return out


def n_difference(D, params: WKBParams = WKBParams(), method="closed_form"):
    f1 = _n_func(method, 1, params)
    f3 = _n_func(method, 3, params)
    return f1(D) - f3(D)


def hypothesize_C_cr(params: WKBParams = WKBParams(), method="closed_form", D_grid=None) -> CcrHypothesis:
    """Scan D for the first crossing of n(nu=1) - n(nu=3) above 1.

    Defaults to the closed form, from which the quoted reference numbers are
    derived. The result is reported as a hypothesis only.
    """
    if D_grid is None:
        D_grid = np.linspace(1e-3, 0.05, 981)
    diffs = np.array([n_difference(D, params, method) for D in D_grid])
    idx = np.nonzero(diffs > 1)[0]
    if idx.size == 0 or idx[0] == 0:
        raise ValueError("no crossing of 1 inside the scanned D range")
    i = int(idx[0])
    lo, hi = float(D_grid[i - 1]), float(D_grid[i])
    Dc = brentq(lambda D: n_difference(D, params, method) - 1, lo, hi, xtol=1e-14)
    return CcrHypothesis(lo, hi, Dc, params.C(Dc), method)
