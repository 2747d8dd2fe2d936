"""Closed-form symbols, stability thresholds and parameter rescalings.

Growth curves on the plane-wave background are computed from the exact
one-step map of the linearized split-step scheme, not from asymptotic
formulas, so they can be checked directly against the time-stepping
propagator in :mod:`sslab.solvers`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError

__all__ = [
    "phase_symbol_P",
    "spectral_phase",
    "resonance_wavenumbers",
    "threshold_ssm_spectral",
    "threshold_fd_planewave",
    "threshold_fd_soliton",
    "monodromy_matrix",
    "planewave_growth_curve",
    "continuum_mi_rate",
    "RescaledParams",
    "rescale_params",
    "C_from_D",
]


def phase_symbol_P(k, beta, r, dx):
    """Per-step phase of the Crank-Nicolson dispersive step.

    ``P(k) = 2 arctan(2 beta r sin^2(k dx / 2))``, already the principal
    value in ``(-pi, pi)``.
    """
    s2 = np.sin(np.asarray(k) * dx / 2) ** 2
    return 2.0 * np.arctan(2.0 * beta * r * s2)


def spectral_phase(k, beta, dt):
    """Principal value in ``(-pi, pi]`` of the spectral step phase beta k^2 dt."""
    p = beta * np.asarray(k, dtype=float) ** 2 * dt
    return np.pi - np.mod(np.pi - p, 2 * np.pi)


def resonance_wavenumbers(beta, dt, m_max):
    """Wavenumbers where |beta| k^2 dt = m pi, for m = 1..m_max."""
    if beta == 0 or dt <= 0:
        raise DomainError("need beta != 0 and dt > 0")
    m = np.arange(1, m_max + 1)
    return np.sqrt(m * np.pi / (abs(beta) * dt))


def threshold_ssm_spectral(beta, dx):
    """Approximate largest stable dt of the spectral split-step method on a plane wave."""
    if beta == 0:
        raise DomainError("beta must be nonzero")
    return dx**2 / (math.pi * abs(beta))


def threshold_fd_planewave(beta, A, dx):
    """Largest stable dt of the fd split-step method on a plane wave.

    Returns ``math.inf`` for beta < 0, where the scheme is unconditionally
    stable on this background.
    """
    if beta == 0:
        raise DomainError("beta must be nonzero")
    if beta < 0:
        return math.inf
    return dx / math.sqrt(2 * beta * abs(A) ** 2)


def threshold_fd_soliton(beta, A):
    """Critical C = (dt/dx)^2 below which all modes of the soliton-background problem are neutral."""
    if beta >= 0:
        raise DomainError("soliton background requires beta < 0")
    if A == 0:
        raise DomainError("A must be nonzero")
    return 1.0 / (abs(beta) * A**2)


def monodromy_matrix(P, q):
    """One-step map acting on ``(a_k, conj(a_{-k}))`` around a plane wave.

    ``P`` is the dispersive phase of the mode and ``q = gamma |u_pw|^2 dt``
    the nonlinear phase per step. Shape ``(..., 2, 2)``.
    """
    P = np.asarray(P, dtype=float)
    q = np.broadcast_to(np.asarray(q, dtype=float), P.shape)
    e = np.exp(1j * P)
    m = np.empty(P.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = e * (1 + 1j * q)
    m[..., 0, 1] = e * (1j * q)
    m[..., 1, 0] = np.conj(e) * (-1j * q)
    m[..., 1, 1] = np.conj(e) * (1 - 1j * q)
    return m


def planewave_growth_curve(method, beta, gamma, A, dt, dx, k=None):
    """Growth rate Re(lambda) per unit time versus k on the plane-wave background.

    Parameters
    ----------
    method : {"fd", "spectral"}
    k : array_like, optional
        Wavenumbers; defaults to 1025 points on ``[0, pi/dx]``.

    Returns
    -------
    k, rate : ndarray
        ``rate = ln(spectral radius of the one-step map) / dt``.

    Notes
    -----
    The plane wave amplitude is ``A/sqrt(gamma)``, so the nonlinear phase per
    step is ``A^2 dt``; ``gamma = 0`` switches the nonlinearity off. The curve
    includes the physical modulational instability (small k, beta < 0).
    """
    if k is None:
        k = np.linspace(0.0, math.pi / dx, 1025)
    k = np.asarray(k, dtype=float)
    if method == "fd":
        P = phase_symbol_P(k, beta, dt / dx**2, dx)
    elif method == "spectral":
        P = spectral_phase(k, beta, dt)
    else:
        raise ValueError(f"unknown method {method!r}")
    q = (abs(A) ** 2 if gamma != 0 else 0.0) * dt
    # det = 1, so the eigenvalues solve mu^2 - tr mu + 1 = 0 with real trace
    half_tr = np.cos(P) - q * np.sin(P)
    excess = np.abs(half_tr) - 1.0
    rho = np.where(excess > 0, np.abs(half_tr) + np.sqrt(np.maximum(half_tr**2 - 1.0, 0.0)), 1.0)
    return k, np.log(rho) / dt


def continuum_mi_rate(k, beta, A):
    """Modulational-instability growth rate of the continuous NLS on a plane wave.

    Nonzero only for beta < 0 and ``k^2 < 2 A^2 / |beta|``.
    """
    k = np.asarray(k, dtype=float)
    if beta >= 0:
        return np.zeros_like(k)
    arg = 2 * A**2 / abs(beta) - k**2
    return np.where(arg > 0, abs(beta) * np.abs(k) * np.sqrt(np.maximum(arg, 0.0)), 0.0)


def C_from_D(D, beta=-1.0, A=1.0):
    """Invert ``D = beta^2 (1/(beta A^2) + C)`` for C."""
    return D / beta**2 + 1.0 / (abs(beta) * A**2)


@dataclass(frozen=True)
class RescaledParams:
    """Scales mapping the soliton-background error equation to its eigenproblem form.

    ``epsilon`` is dx/2; X = X_scale * x / epsilon; Lambda = Lambda_scale * lambda.
    """

    beta: float
    A: float
    C: float
    epsilon: float
    delta: float
    D: float
    Lambda_scale: float
    V_amplitude: float
    X_scale: float

    def to_physical_rate(self, Lambda):
        return Lambda / self.Lambda_scale

    def to_x(self, X):
        return np.asarray(X) * self.epsilon / self.X_scale


def rescale_params(beta, A=None, C=None, dx=None) -> RescaledParams:
    """Rescaling for the soliton background (omega_b = A^2).

    Accepts either ``(beta, A, C, dx)`` or a single config object with
    ``beta``, ``amplitude_A``, ``ratio_C`` and ``grid.dx``.
    """
    if A is None and hasattr(beta, "amplitude_A"):
        cfg = beta
        beta, A, C, dx = cfg.beta, cfg.amplitude_A, cfg.ratio_C, cfg.grid.dx
    if beta >= 0:
        raise DomainError("soliton background requires beta < 0")
    if C <= 0:
        raise DomainError(f"C must be positive, got {C}")
    delta = -A**2 - 1.0 / (C * beta)
    lam_scale = C * beta**2 / A**2
    return RescaledParams(
        beta=beta,
        A=A,
        C=C,
        epsilon=dx / 2,
        delta=delta,
        D=-lam_scale * delta,
        Lambda_scale=lam_scale,
        V_amplitude=2 * C * beta**2,
        X_scale=A / math.sqrt(-beta),
    )
