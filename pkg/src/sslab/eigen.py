"""Numerov discretization and shift-invert solution of the tail-mode eigenproblem.

The problem on the periodic X-domain is::

    (d^2/dX^2 + D - V(eps X) [[2, 1], [1, 2]]) phi = i Lambda sigma_3 phi,
    V(y) = 2 C beta^2 sech^2(y).

Numerov's scheme turns it into the pencil ``G f = i (Lambda - Lambda0) H f``
with ``H`` the (symmetric positive definite) Numerov weight matrix. Eigenvalues
nearest the shift are found with ARPACK in shift-invert mode on a sparse LU
factorization.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigs

from .core import ConfigurationError
from .linear_theory import C_from_D, RescaledParams

logger = logging.getLogger(__name__)

__all__ = [
    "EigenProblem",
    "EigenPair",
    "EigenReport",
    "SymmetryCheck",
    "ShiftFactorizationError",
    "assemble_numerov",
    "periodic_numerov_matrices",
    "peak_outside_core",
    "numerov_symbol",
    "solve_smallest",
    "classify_modes",
    "symmetry_check",
    "partner_residual",
    "growth_rate_physical",
    "dense_eigenvalues",
    "localization",
]

TOL_REAL = 1e-10
LOCALIZED = 0.5


class ShiftFactorizationError(RuntimeError):
    """G - sigma H could not be factorized at the requested shift."""


@dataclass(frozen=True)
class EigenProblem:
    """Discretized eigenproblem for given detuning ``D`` and scale ``epsilon``.

    The X-domain is the rescaled physical domain ``[-L/2, L/2)``, of length
    ``(A/sqrt(-beta)) L / epsilon``. ``dX`` is adjusted slightly if needed so
    that a whole number of cells fits the period.
    """

    D: float
    epsilon: float
    length_L: float = 40.0
    dX: float = 0.1
    beta: float = -1.0
    A: float = 1.0
    shift_Lambda0: complex = 0.0

    def __post_init__(self):
        if self.beta >= 0:
            raise ConfigurationError("soliton-background problem requires beta < 0")
        if self.n_unknowns < 7:
            raise ConfigurationError(f"need M >= 8, got M = {self.n_unknowns + 1}")

    @classmethod
    def from_C(cls, C, epsilon, **kw):
        beta = kw.get("beta", -1.0)
        A = kw.get("A", 1.0)
        D = beta**2 * (1.0 / (beta * A**2) + C)
        return cls(D, epsilon, **kw)

    @property
    def C(self) -> float:
        return C_from_D(self.D, self.beta, self.A)

    @property
    def X_scale(self) -> float:
        return self.A / math.sqrt(-self.beta)

    @property
    def X_length(self) -> float:
        return self.X_scale * self.length_L / self.epsilon

    @property
    def n_unknowns(self) -> int:
        """Grid points per period, ``M - 1`` in the end-point-inclusive count."""
        return max(int(round(self.X_length / self.dX)), 1)

    @property
    def M(self) -> int:
        return self.n_unknowns + 1

    @property
    def dX_eff(self) -> float:
        return self.X_length / self.n_unknowns

    @cached_property
    def X(self) -> np.ndarray:
        return -self.X_length / 2 + self.dX_eff * np.arange(self.n_unknowns)

    @property
    def V_amplitude(self) -> float:
        return 2 * self.C * self.beta**2

    @cached_property
    def potential_values(self) -> np.ndarray:
        return self.V_amplitude / np.cosh(self.epsilon * self.X) ** 2

    def with_shift(self, Lambda0) -> "EigenProblem":
        return replace(self, shift_Lambda0=Lambda0)

    def rescaled(self) -> RescaledParams:
        C = self.C
        lam_scale = C * self.beta**2 / self.A**2
        return RescaledParams(
            beta=self.beta,
            A=self.A,
            C=C,
            epsilon=self.epsilon,
            delta=-self.D / lam_scale,
            D=self.D,
            Lambda_scale=lam_scale,
            V_amplitude=self.V_amplitude,
            X_scale=self.X_scale,
        )


def _periodic_tridiag(n, diag, off):
    m = sp.diags([np.full(n - 1, off), np.full(n, diag), np.full(n - 1, off)], [-1, 0, 1], format="lil")
    m[0, n - 1] = off
    m[n - 1, 0] = off
    return m.tocsr()


def periodic_numerov_matrices(n, dX):
    """Periodic second difference ``A_per / dX^2`` and Numerov weights ``N_per``."""
    return _periodic_tridiag(n, -2.0, 1.0) / dX**2, _periodic_tridiag(n, 10.0 / 12.0, 1.0 / 12.0)


def assemble_numerov(problem: EigenProblem):
    """Return sparse ``(G, H)`` of size ``2 n`` for the Numerov pencil.

    ``G = s3 [A/dX^2 + D N - N Vhat - i Lambda0 s3 N]`` and ``H = N`` (block
    diagonal), where ``A`` is the periodic second difference, ``N`` the
    periodic Numerov weights (10/12 on the diagonal, 1/12 off it) and
    ``Vhat = [[2V, V], [V, 2V]]``.
    """
    lap, N = periodic_numerov_matrices(problem.n_unknowns, problem.dX_eff)
    V = sp.diags(problem.potential_values)
    K11 = lap + problem.D * N - 2.0 * (N @ V)
    K12 = -(N @ V)
    lam0 = complex(problem.shift_Lambda0)
    if lam0 != 0:
        G = sp.bmat([[K11 - 1j * lam0 * N, K12], [-K12, -K11 - 1j * lam0 * N]], format="csc")
    else:
        G = sp.bmat([[K11, K12], [-K12, -K11]], format="csc")
    H = sp.block_diag([N, N], format="csc")
    return G, H


def numerov_symbol(kappa, dX):
    """Eigenvalue of N^-1 A / dX^2 on the Fourier mode exp(i kappa X)."""
    s2 = np.sin(np.asarray(kappa) * dX / 2) ** 2
    return -(4.0 / dX**2) * s2 / (1.0 - s2 / 3.0)


def localization(mode: np.ndarray, window_fraction=0.1) -> float:
    """Largest share of the mode norm inside a window of 10% of the domain.

    The density is folded about X = 0 first, so a parity eigenstate made of
    two mirror-image lumps counts as localized.
    """
    dens = np.abs(mode[0]) ** 2 + np.abs(mode[1]) ** 2
    total = dens.sum()
    if total == 0:
        return 0.0
    dens = dens / total
    n = dens.size
    w = max(1, int(round(window_fraction * n)))
    if n % 2 == 0:
        half = n // 2
        f = np.empty(half + 1)
        f[0] = dens[half]
        f[1:half] = dens[half + 1:] + dens[half - 1:0:-1]
        f[half] = dens[0]
    else:
        f = dens
    w = min(w, f.size)
    c = np.concatenate([[0.0], np.cumsum(f)])
    return float(np.max(c[w:] - c[:-w]))


@dataclass
class EigenPair:
    Lambda: complex
    mode: np.ndarray
    residual: float
    localization: float = 0.0
    peak_X: float = 0.0
    is_real: bool = False
    converged: bool = True

    @property
    def Lambda_R(self) -> float:
        return float(np.real(self.Lambda))

    @property
    def Lambda_I(self) -> float:
        return float(np.imag(self.Lambda))


@dataclass
class EigenReport:
    problem: EigenProblem
    pairs: list[EigenPair]
    dominant: int | None = None
    shifts: list[complex] = field(default_factory=list)
    converged: bool = True
    window_radius: float = math.inf

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.Lambda for p in self.pairs])

    @property
    def dominant_pair(self) -> EigenPair | None:
        return None if self.dominant is None else self.pairs[self.dominant]

    def real_unstable(self, tol_real=TOL_REAL) -> list[EigenPair]:
        return [p for p in self.pairs if abs(p.Lambda_I) < tol_real and p.Lambda_R > tol_real]

    def to_dict(self) -> dict:
        pr = self.problem
        return {
            "problem": {
                "D": pr.D,
                "C": pr.C,
                "epsilon": pr.epsilon,
                "length_L": pr.length_L,
                "dX": pr.dX_eff,
                "M": pr.M,
                "beta": pr.beta,
                "A": pr.A,
            },
            "shifts": [[complex(s).real, complex(s).imag] for s in self.shifts],
            "converged": self.converged,
            "dominant": self.dominant,
            "pairs": [
                {
                    "Lambda_re": p.Lambda_R,
                    "Lambda_im": p.Lambda_I,
                    "residual": p.residual,
                    "localization": p.localization,
                    "peak_X": p.peak_X,
                    "is_real": p.is_real,
                    "converged": p.converged,
                }
                for p in self.pairs
            ],
        }


def _start_vector(dim):
    return np.random.default_rng(20120101).standard_normal(dim)


def _residuals(G, H, mu, vecs):
    out = np.empty(len(mu))
    for j in range(len(mu)):
        f = vecs[:, j]
        out[j] = np.linalg.norm(G @ f - mu[j] * (H @ f)) / np.linalg.norm(f)
    return out


def _window(problem: EigenProblem, count: int, ncv=None, maxiter=None):
    G, H = assemble_numerov(problem)
    dim = G.shape[0]
    converged = np.ones(count, dtype=bool)
    if count >= dim - 1:
        mu, vecs = scipy.linalg.eig(G.toarray(), H.toarray())
        order = np.argsort(np.abs(mu))[:count]
        mu, vecs = mu[order], vecs[:, order]
    else:
        try:
            # a wide Krylov space: the continuum on the imaginary axis clusters |mu| near real shifts
            ncv = min(dim - 1, max(2 * count + 1, ncv or 96))
            mu, vecs = eigs(G, k=count, M=H, sigma=0, which="LM", v0=_start_vector(dim), ncv=ncv, tol=0,
                             maxiter=maxiter)
        except ArpackNoConvergence as exc:
            mu, vecs = exc.eigenvalues, exc.eigenvectors
            converged = np.zeros(len(mu), dtype=bool)
            logger.warning("ARPACK returned %d of %d eigenpairs", len(mu), count)
        except RuntimeError as exc:
            raise ShiftFactorizationError(
                f"factorization failed at Lambda0={problem.shift_Lambda0}; adjust the shift"
            ) from exc
    res = _residuals(G, H, mu, vecs)
    lam = complex(problem.shift_Lambda0) - 1j * mu
    n = problem.n_unknowns
    pairs = []
    for j in range(len(mu)):
        f = vecs[:, j]
        f = f / np.linalg.norm(f)
        pairs.append(EigenPair(complex(lam[j]), np.vstack([f[:n], f[n:]]), float(res[j]), converged=bool(converged[j])))
    return pairs, bool(converged.all())


def _annotate(problem: EigenProblem, pairs, tol_real):
    for p in pairs:
        dens = np.abs(p.mode[0]) ** 2 + np.abs(p.mode[1]) ** 2
        p.localization = localization(p.mode)
        p.peak_X = float(problem.X[int(np.argmax(dens))])
        p.is_real = abs(p.Lambda_I) < tol_real


def _merge(pairs):
    out = []
    for p in sorted(pairs, key=lambda q: q.residual):
        if any(abs(p.Lambda - q.Lambda) <= 1e-9 + 1e-7 * abs(p.Lambda) for q in out):
            continue
        out.append(p)
    return out


def solve_smallest(problem: EigenProblem, count=24, auto_shift=False, tol_real=TOL_REAL, ladder=4,
                   ladder_count=4) -> EigenReport:
    """Eigenpairs with Lambda nearest the problem's shift Lambda0.

    Pairs are sorted by descending Re(Lambda) and annotated (localization,
    peak position, realness). With ``auto_shift`` and no localized real
    unstable mode in the first window, further windows are solved at real
    shifts climbing in steps of ``D / ladder`` (or to just past a mode found
    above the current shift) until a shift passes the largest such mode, or
    reaches D with none found. All windows are merged. Ladder windows ask for
    only ``ladder_count`` pairs: near a real shift the continuum offers many
    almost equidistant eigenvalues, and a large request converges slowly.
    """
    pairs, ok = _window(problem, count)
    shifts = [complex(problem.shift_Lambda0)]
    radius = max(abs(p.Lambda - problem.shift_Lambda0) for p in pairs)
    _annotate(problem, pairs, tol_real)

    def has_target(ps):
        return any(p.is_real and p.Lambda_R > tol_real and p.localization >= LOCALIZED for p in ps)

    if auto_shift and problem.D > 0 and not has_target(pairs):
        step = problem.D / ladder
        shift = step
        for _ in range(4 * ladder):
            wp, wok = _window(problem.with_shift(shift), ladder_count, ncv=64, maxiter=2000)
            _annotate(problem, wp, tol_real)
            pairs.extend(wp)
            shifts.append(complex(shift))
            ok = ok and wok
            tops = [p.Lambda_R for p in wp if p.is_real and p.Lambda_R > tol_real and p.localization >= LOCALIZED]
            # done once the shift has passed the top real mode, or reached D with nothing found
            if (tops and max(tops) < shift) or (shift >= problem.D * (1 - 1e-12) and not tops):
                break
            # step just past a mode found above the shift, else climb the ladder
            shift = max(tops) + step / 4 if tops else shift + step
        pairs = _merge(pairs)
        radius = math.inf
    pairs.sort(key=lambda p: -p.Lambda_R)
    report = EigenReport(problem, pairs, None, shifts, ok, radius)
    return classify_modes(report, tol_real=tol_real)


def classify_modes(report: EigenReport, tol_real=TOL_REAL, threshold=LOCALIZED) -> EigenReport:
    """Mark the dominant mode: greatest Re(Lambda) among real, localized, unstable pairs."""
    if not report.pairs:
        raise ValueError("empty report")
    _annotate(report.problem, report.pairs, tol_real)
    best = None
    for i, p in enumerate(report.pairs):
        if p.is_real and p.Lambda_R > tol_real and p.localization >= threshold:
            if best is None or p.Lambda_R > report.pairs[best].Lambda_R:
                best = i
    report.dominant = best
    return report


def peak_outside_core(report: EigenReport, pair: EigenPair | None = None) -> bool:
    """True if the mode peaks outside the soliton core |x| < sqrt(-beta)/A."""
    pair = pair or report.dominant_pair
    if pair is None:
        return False
    return abs(report.problem.epsilon * pair.peak_X) >= 1.0


def partner_residual(problem: EigenProblem, pair: EigenPair) -> float:
    """Residual of (sigma_1 phi, -Lambda) in the unshifted problem, relative to |phi|."""
    G, H = assemble_numerov(problem.with_shift(0.0))
    f = np.concatenate([pair.mode[1], pair.mode[0]])
    return float(np.linalg.norm(G @ f - 1j * (-pair.Lambda) * (H @ f)) / np.linalg.norm(f))


@dataclass
class SymmetryCheck:
    passed: bool
    checked: int
    inconclusive: int
    failures: list = field(default_factory=list)


def symmetry_check(report: EigenReport, rtol=1e-8) -> SymmetryCheck:
    """Look for the partners -Lambda, conj(Lambda), -conj(Lambda) of every eigenvalue.

    A partner that would lie outside the solved window is counted as
    inconclusive rather than failed.
    """
    lams = report.eigenvalues
    scale = max(float(np.max(np.abs(lams))), 1e-300)
    tol = rtol * scale
    center = report.shifts[0] if report.shifts else 0.0
    radius = report.window_radius
    failures = []
    inconclusive = 0
    checked = 0
    for lam in lams:
        for target in (-lam, np.conj(lam), -np.conj(lam)):
            if np.min(np.abs(lams - target)) <= tol:
                checked += 1
            elif abs(target - center) >= radius * (1 - 1e-6):
                inconclusive += 1
            else:
                failures.append((complex(lam), complex(target)))
    return SymmetryCheck(not failures, checked, inconclusive, failures)


def growth_rate_physical(report: EigenReport, rescale: RescaledParams | None = None):
    """lambda = Lambda_R A^2 / (C beta^2) of the dominant mode, or None."""
    pair = report.dominant_pair
    if pair is None:
        return None
    rescale = rescale or report.problem.rescaled()
    return rescale.to_physical_rate(pair.Lambda_R)


def dense_eigenvalues(problem: EigenProblem) -> np.ndarray:
    """All eigenvalues Lambda from a dense QZ solve (small problems only)."""
    G, H = assemble_numerov(problem)
    mu = scipy.linalg.eigvals(G.toarray(), H.toarray())
    return complex(problem.shift_Lambda0) - 1j * mu
