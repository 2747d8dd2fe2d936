"""Spectra, instability growth rates, unstable-mode extraction and drift tracking."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ComplexField, Grid1D

__all__ = [
    "SpectrumSnapshot",
    "GrowthRateEstimate",
    "ModeProfile",
    "ModeExtraction",
    "DriftTrack",
    "NoModeFound",
    "spectrum",
    "band_mask",
    "band_history",
    "linear_stage_end",
    "growth_rate",
    "growth_rate_fit",
    "extract_unstable_mode",
    "soliton_center",
    "track_drift",
]


class NoModeFound(ValueError):
    """The high-wavenumber content of a field is identically zero."""


@dataclass(frozen=True)
class SpectrumSnapshot:
    """|F[u]| at one time, in DFT order (see ``Grid1D.wavenumbers``)."""

    time: float
    wavenumbers: np.ndarray
    magnitudes: np.ndarray

    def shifted(self):
        """(k, |u_hat|) in ascending k order."""
        return np.fft.fftshift(self.wavenumbers), np.fft.fftshift(self.magnitudes)


@dataclass(frozen=True)
class GrowthRateEstimate:
    rate: float
    k_window: tuple[float, float]
    t_measure: float
    noise_floor: float
    band_max: float


@dataclass(frozen=True)
class ModeProfile:
    envelope: ComplexField
    peak_position_x: float
    side: str


@dataclass(frozen=True)
class ModeExtraction:
    """High-pass part of a field written as ``exp(i k_max x) * envelope``."""

    envelope: ComplexField
    lowpass: ComplexField
    left: ModeProfile | None
    right: ModeProfile | None
    center: float

    def remodulate(self) -> ComplexField:
        g = self.envelope.grid
        carrier = np.exp(1j * g.k_max * (g.points - g.points[0]))
        return ComplexField(g, self.envelope.values * carrier + self.lowpass.values)


@dataclass(frozen=True)
class DriftTrack:
    times: np.ndarray
    centers: np.ndarray
    width: float
    onset_time: float | None
    velocity: float | None
    truncated: bool

    def displacement(self):
        return np.abs(self.centers - self.centers[0])


def spectrum(u: ComplexField, time=0.0) -> SpectrumSnapshot:
    return SpectrumSnapshot(time, u.grid.wavenumbers, np.abs(np.fft.fft(u.values)))


def band_mask(grid: Grid1D, fraction=0.9):
    """Wavenumbers with |k| >= fraction * k_max."""
    return np.abs(grid.wavenumbers) >= fraction * grid.k_max * (1 - 1e-12)


def band_history(run, fraction=0.9):
    """Max spectral magnitude in the high-k band for each snapshot."""
    mask = band_mask(run.grid, fraction)
    mags = np.abs(np.fft.fft(run.data, axis=1))[:, mask]
    return run.times.copy(), mags.max(axis=1)


def linear_stage_end(run, fraction=0.9, ceiling=1e-2):
    """Last snapshot time before the band maximum first exceeds ``ceiling``
    times the peak of the initial spectrum. Falls back to the final time.
    """
    times, bmax = band_history(run, fraction)
    ref = np.abs(np.fft.fft(run.data[0])).max()
    over = np.nonzero(bmax > ceiling * ref)[0]
    if over.size == 0:
        return float(times[-1])
    i = max(int(over[0]) - 1, 1)
    return float(times[i])


def growth_rate(run, k_band=0.9, t=None) -> GrowthRateEstimate:
    """Instability growth rate from a single spectrum.

    ``rate = (ln max_band |F[u](t)| - ln noise_floor) / t`` with the noise floor
    taken as the band maximum of the t=0 spectrum. ``k_band`` is the fraction
    of k_max where the band starts. When ``t`` is None it defaults to
    :func:`linear_stage_end`.
    """
    if t is None:
        t = linear_stage_end(run, k_band)
    if not t > 0:
        raise ValueError("measurement time must be positive")
    mask = band_mask(run.grid, k_band)
    floor = float(np.abs(np.fft.fft(run.data[0]))[mask].max())
    if floor == 0:
        raise ValueError("noise floor is zero; seed the initial condition with noise")
    i = run.index_at(t)
    bmax = float(np.abs(np.fft.fft(run.data[i]))[mask].max())
    tm = float(run.times[i])
    rate = (math.log(bmax) - math.log(floor)) / tm
    return GrowthRateEstimate(rate, (k_band * run.grid.k_max, run.grid.k_max), tm, floor, bmax)


def growth_rate_fit(run, k_band=0.9, t_start=None, t_end=None):
    """Least-squares slope of ln(max band magnitude) over ``[t_start, t_end]``.

    Defaults use the second half of the linear stage. Unlike :func:`growth_rate`
    this is insensitive to how the initial noise projects on the unstable mode.
    """
    times, bmax = band_history(run, k_band)
    if t_end is None:
        t_end = linear_stage_end(run, k_band)
    if t_start is None:
        t_start = 0.5 * t_end
    sel = (times >= t_start) & (times <= t_end)
    if sel.sum() < 2:
        raise ValueError("need at least two snapshots in the fit window")
    slope, _ = np.polyfit(times[sel], np.log(bmax[sel]), 1)
    return float(slope)


def _peak_refined(x, y, i):
    n = len(y)
    if 0 < i < n - 1:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        den = y0 - 2 * y1 + y2
        if den < 0:
            return x[i] + 0.5 * (y0 - y2) / den * (x[1] - x[0])
    return x[i]


def soliton_center(u: ComplexField, cutoff_fraction=0.5) -> float:
    """Position of the maximum of the low-pass filtered |u|, refined sub-grid."""
    g = u.grid
    uh = np.fft.fft(u.values)
    uh[np.abs(g.wavenumbers) >= cutoff_fraction * g.k_max] = 0
    a = np.abs(np.fft.ifft(uh))
    i = int(np.argmax(a))
    # rotate so the peak sits mid-array before refining (periodic wrap)
    shift = g.n_points // 2 - i
    a = np.roll(a, shift)
    xc = _peak_refined(g.points, a, g.n_points // 2)
    return float(((xc - shift * g.dx) + g.length / 2) % g.length - g.length / 2)


def extract_unstable_mode(u: ComplexField, cutoff_fraction=0.5, center=None) -> ModeExtraction:
    """Split ``u`` into a low-k part and a slowly varying envelope at k_max.

    Fourier content with ``|k| < cutoff_fraction * k_max`` is removed; what is
    left is multiplied by ``exp(-i k_max (x - x_0))``. Peaks of |envelope| are
    located on each side of ``center`` (default: the soliton centre).
    """
    g = u.grid
    uh = np.fft.fft(u.values)
    low = np.abs(g.wavenumbers) < cutoff_fraction * g.k_max
    high = np.where(low, 0, uh)
    if not np.any(high):
        raise NoModeFound("no Fourier content above the cutoff")
    carrier = np.exp(-1j * g.k_max * (g.points - g.points[0]))
    env = ComplexField(g, np.fft.ifft(high) * carrier)
    lowpass = ComplexField(g, np.fft.ifft(np.where(low, uh, 0)))
    if center is None:
        center = soliton_center(u, cutoff_fraction)
    a = np.abs(env.values)
    rel = (g.points - center + g.length / 2) % g.length - g.length / 2
    profiles = {}
    for side, sel in (("left", rel < 0), ("right", rel > 0)):
        idx = np.nonzero(sel)[0]
        if idx.size == 0 or not np.any(a[idx] > 0):
            profiles[side] = None
            continue
        i = int(idx[np.argmax(a[idx])])
        y0, y1, y2 = a[i - 1], a[i], a[(i + 1) % g.n_points]
        den = y0 - 2 * y1 + y2
        off = 0.5 * (y0 - y2) / den * g.dx if den < 0 else 0.0
        xp = (rel[i] + off + center + g.length / 2) % g.length - g.length / 2
        profiles[side] = ModeProfile(env, float(xp), side)
    return ModeExtraction(env, lowpass, profiles["left"], profiles["right"], float(center))


def track_drift(run, cutoff_fraction=0.5, width=None) -> DriftTrack:
    """Soliton centre versus time, unwrapped across the periodic boundary.

    ``onset_time`` is the first time the centre has moved more than one
    soliton width ``sqrt(-beta)/A``; ``velocity`` is a linear fit over the
    second half of the post-onset record. If the low-pass peak falls below half
    its initial value the track stops there and ``truncated`` is set.
    """
    cfg = run.config
    if width is None:
        width = math.sqrt(-cfg.beta) / abs(cfg.amplitude_A) if cfg.beta < 0 else 1.0
    g = run.grid
    L = g.length
    lowmask = np.abs(g.wavenumbers) < cutoff_fraction * g.k_max
    peak0 = None
    times, centers = [], []
    truncated = False
    prev = None
    for t, row in zip(run.times, run.data):
        f = ComplexField(g, row)
        lp = np.abs(np.fft.ifft(np.where(lowmask, np.fft.fft(row), 0))).max()
        if peak0 is None:
            peak0 = lp
        if lp < 0.5 * peak0:
            truncated = True
            break
        c = soliton_center(f, cutoff_fraction)
        if prev is not None:
            c = prev + ((c - prev + L / 2) % L - L / 2)
        prev = c
        times.append(float(t))
        centers.append(c)
    times = np.array(times)
    centers = np.array(centers)
    disp = np.abs(centers - centers[0]) if len(centers) else centers
    onset_idx = np.nonzero(disp > width)[0]
    onset = float(times[onset_idx[0]]) if onset_idx.size else None
    velocity = None
    if onset is not None:
        post = np.nonzero(times >= onset)[0]
        tail = post[len(post) // 2:]
        if tail.size >= 2:
            velocity = float(np.polyfit(times[tail], centers[tail], 1)[0])
    return DriftTrack(times, centers, width, onset, velocity, truncated)
