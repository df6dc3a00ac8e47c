"""Post-processing: dimensionless time, zero-crossing wave statistics and
breaking diagnostics extracted from run records."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InsufficientDataError(ValueError):
    """Too few zero crossings for a wave-by-wave analysis."""


def dimensionless_time(t, h0: float, g: float):
    """t' = t sqrt(g / h0)."""
    if h0 <= 0:
        raise ValueError("reference depth must be positive")
    return np.asarray(t, float) * math.sqrt(g / h0)


def zero_upcrossings(t: np.ndarray, signal: np.ndarray) -> np.ndarray:
    """Interpolated times where the signal crosses zero going upward."""
    s0 = signal[:-1]
    s1 = signal[1:]
    mask = (s0 < 0.0) & (s1 >= 0.0)
    idx = np.flatnonzero(mask)
    frac = -s0[idx] / (s1[idx] - s0[idx])
    return t[idx] + frac * (t[idx + 1] - t[idx])


@dataclass
class WaveStats:
    wave_height: float
    mean_level: float
    n_waves: int


def wave_by_wave(t, eta, solitary: bool = False) -> WaveStats:
    """Mean crest-to-trough height and mean level of one eta(t) series.

    Periodic records are segmented by zero up-crossings about the series
    mean, averaging over the integer number of waves found; solitary records
    report the running maximum instead.
    """
    t = np.asarray(t, float)
    eta = np.asarray(eta, float)
    if solitary:
        return WaveStats(float(eta.max()), float(eta.mean()), 1)
    mean = float(eta.mean())
    centered = eta - mean
    crossings = zero_upcrossings(t, centered)
    if crossings.size < 2:
        raise InsufficientDataError(
            f"found {crossings.size} zero up-crossings, need at least 2")
    heights = []
    for t0, t1 in zip(crossings[:-1], crossings[1:]):
        sel = (t >= t0) & (t <= t1)
        if np.count_nonzero(sel) < 3:
            continue
        heights.append(float(eta[sel].max() - eta[sel].min()))
    if not heights:
        raise InsufficientDataError("no resolvable waves between crossings")
    # mean level over the integer number of periods between the crossings
    span = (t >= crossings[0]) & (t <= crossings[-1])
    mean_level = float(eta[span].mean())
    return WaveStats(float(np.mean(heights)), mean_level, len(heights))


def spatial_wave_stats(times, eta_history, window_start: float,
                       solitary: bool = False):
    """Per-node wave height and mean level from a profile history.

    ``eta_history`` is a (n_samples, n_nodes) array; only samples after
    ``window_start`` enter the statistics.  Nodes without enough crossings
    report NaN.
    """
    times = np.asarray(times, float)
    hist = np.asarray(eta_history, float)
    sel = times >= window_start
    ts = times[sel]
    hs = hist[sel]
    n_nodes = hs.shape[1]
    height = np.full(n_nodes, np.nan)
    level = np.full(n_nodes, np.nan)
    for i in range(n_nodes):
        try:
            st = wave_by_wave(ts, hs[:, i], solitary=solitary)
        except InsufficientDataError:
            continue
        height[i] = st.wave_height
        level[i] = st.mean_level
    return height, level


def onset_tprimes(result, h0: float, g: float):
    """Dimensionless onset times of every breaking lineage in a run."""
    return [float(dimensionless_time(t, h0, g))
            for t, _x in result.onset_events]


def first_onset_tprime(result, h0: float, g: float):
    ts = onset_tprimes(result, h0, g)
    return ts[0] if ts else None


def first_onset_in_range(result, x_lo: float, x_hi: float):
    """First onset time whose cluster center lies inside [x_lo, x_hi]."""
    for t, x in result.onset_events:
        if x_lo <= x <= x_hi:
            return t
    return None


def first_wave_onset_tprime(result, scenario):
    """Dimensionless time of the first breaking onset in open water.

    The local criterion permanently flags the region beyond the still-water
    shoreline once a film wets it (|eta|/|h| diverges as h -> 0); onsets
    whose cluster center lies at or beyond the shoreline are study
    artifacts, not wave breaking, and are skipped here.
    """
    import numpy as np

    bathy = scenario.bathymetry()
    x = scenario.grid.nodes()
    for t, xc in result.onset_events:
        h_here = float(np.interp(xc, x, bathy.h))
        if h_here > 0.0:
            return float(dimensionless_time(t, scenario.h0,
                                            scenario.scheme.g))
    return None


def rephase(t_ref, eta_ref, t_sig, eta_sig, period: float):
    """Shift a signal in time to best match a reference over one period.

    Used with the first gauge to align numerical signals before comparison.
    Returns the applied shift.
    """
    t_ref = np.asarray(t_ref, float)
    t_sig = np.asarray(t_sig, float)
    shifts = np.linspace(-period / 2, period / 2, 201)
    best = 0.0
    best_err = np.inf
    lo = max(t_ref[0], t_sig[0] + period)
    hi = min(t_ref[-1], t_sig[-1] - period)
    if hi <= lo:
        return 0.0
    probe = np.linspace(lo, hi, 200)
    ref_vals = np.interp(probe, t_ref, eta_ref)
    for s in shifts:
        sig_vals = np.interp(probe + s, t_sig, eta_sig)
        err = float(np.mean((ref_vals - sig_vals) ** 2))
        if err < best_err:
            best_err = err
            best = s
    return best
