"""Smoothness-sensor limiter, node smoothing, cell limiter and wet/dry cut-off.

The sensor compares second- and fourth-order approximations of d_xx(eta):
their difference is O(dx^2) on smooth data but O(jump / dx^2) at a
discontinuity, so the ratio drops to about 4 dx across a jump while staying
clamped at one on smooth profiles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d


def _mirror_pad(eta: np.ndarray, width: int) -> np.ndarray:
    """Reflect about the boundary nodes (eta[-1] := eta[1], etc.)."""
    return np.pad(eta, width, mode="reflect")


def smoothness_sensor(eta: np.ndarray, dx: float, eps: float) -> np.ndarray:
    """Raw per-node sensor sigma in (0, 1]."""
    eta = np.asarray(eta, float)
    if eta.size < 5:
        raise ValueError("sensor needs at least 5 nodes")
    p = _mirror_pad(eta, 2)
    c = p[2:-2]
    num = eps + np.abs(c - p[1:-3]) / dx + np.abs(c - p[3:-1]) / dx
    den = eps + np.abs(p[4:] - 4.0 * p[3:-1] + 6.0 * c - 4.0 * p[1:-3]
                       + p[:-4]) / (12.0 * dx * dx)
    return np.minimum(1.0, num / den)


def smooth_and_threshold(sigma: np.ndarray):
    """Threshold at 0.5, smooth with (1/4, 1/2, 1/4), take cell minima.

    Returns (delta_node, delta_cell) with delta_cell per interface.
    """
    hat = np.where(sigma < 0.5, sigma, 1.0)
    p = _mirror_pad(hat, 1)
    delta = 0.25 * p[:-2] + 0.5 * p[1:-1] + 0.25 * p[2:]
    delta_cell = np.minimum(delta[:-1], delta[1:])
    return delta, delta_cell


def wet_dry_cutoff(H: np.ndarray, dx: float, length: float, alpha: float,
                   form: str = "local") -> np.ndarray:
    """Exponential cut-off, ~1 in deep water and ~0 next to dry nodes.

    ``local`` (default) measures the depth variation across the 5-point
    window relative to its minimum, so the cut-off is exactly inert in
    uniformly wet flow; ``published`` keeps the global-maximum numerator,
    which damps dispersion by exp(-alpha dx) even in deep water.
    """
    H = np.asarray(H, float)
    eps = (dx / length) ** 2
    local_min = minimum_filter1d(H, size=5, mode="nearest")
    if form == "published":
        num = H.max() - eps
    else:
        local_max = maximum_filter1d(H, size=5, mode="nearest")
        num = local_max - np.maximum(local_min, eps)
    expo = -alpha * dx * num / np.maximum(eps, local_min - eps)
    omega = np.clip(np.exp(np.minimum(expo, 0.0)), 0.0, 1.0)
    # a window containing dry nodes is cut off outright (the local form's
    # numerator can vanish on a uniformly dry window)
    return np.where(local_min <= eps, 0.0, omega)


def cell_mu(f_break: np.ndarray, delta_cell: np.ndarray,
            omega: np.ndarray) -> np.ndarray:
    """Per-interface mass-matrix limiter.

    mu = 1 where both adjacent nodes are non-breaking, delta * omega
    otherwise (omega taken as the minimum of the adjacent nodal values).
    """
    f = np.asarray(f_break)
    omega_cell = np.minimum(omega[:-1], omega[1:])
    both_clean = np.minimum(f[:-1], f[1:]) == 1
    return np.where(both_clean, 1.0, delta_cell * omega_cell)


@dataclass
class LimiterField:
    """Limiter snapshot for one time level."""

    sigma: np.ndarray       # raw sensor, per node
    delta: np.ndarray       # smoothed sensor, per node
    delta_cell: np.ndarray  # per interface
    omega: np.ndarray       # wet/dry cut-off, per node
    mu_cell: np.ndarray     # mass-matrix limiter, per interface

    @classmethod
    def compute(cls, eta, H, f_break, dx, length, alpha, eps,
                form: str = "local") -> "LimiterField":
        sigma = smoothness_sensor(eta, dx, eps)
        delta, delta_cell = smooth_and_threshold(sigma)
        omega = wet_dry_cutoff(H, dx, length, alpha, form)
        mu = cell_mu(f_break, delta_cell, omega)
        return cls(sigma, delta, delta_cell, omega, mu)

    @classmethod
    def fixed(cls, n_nodes: int, mu: float = 0.0,
              omega: float = 1.0) -> "LimiterField":
        """Uniform limiter values, used by tests and forced-mode runs."""
        ones = np.ones(n_nodes)
        return cls(ones, ones, np.full(n_nodes - 1, 1.0),
                   np.full(n_nodes, omega), np.full(n_nodes - 1, mu))
