"""Breaking-front detection: local, hybrid and physical criteria.

Each detector returns a per-node flag field (1 = dispersive propagation,
0 = breaking, solved as shallow water).  The hybrid and physical criteria
share the pre-flagging and cluster analysis machinery; they differ in the
gate deciding whether a cluster is really breaking (bore Froude vs. critical
free-surface Froude) before sizing the numerical roller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import Bathymetry, Grid1D, State, total_depth, velocity

CLUSTER_EXTEND = 4  # peak/trough search window beyond the pre-flagged run


@dataclass
class DetectorConfig:
    """Criterion selection and thresholds."""

    kind: str = "hybrid"   # local | hybrid | physical | boussinesq | shallow_water
    e_crit: float = 0.8
    e_term: float = 0.3
    gamma: float = 0.6
    phi_deg: float = 30.0
    fr_b_cr: float = 1.3
    fr_s_cr: float = 1.0
    c_roller: float = 2.9
    c_numerical: float = 2.5
    direction: int = 0     # +1 / -1 pinned wave direction, 0 = infer locally

    def __post_init__(self):
        kinds = ("local", "hybrid", "physical", "boussinesq", "shallow_water")
        if self.kind not in kinds:
            raise ValueError(f"unknown detector kind {self.kind!r}")

    @property
    def tan_phi(self) -> float:
        if math.isinf(self.phi_deg):
            return math.inf
        return math.tan(math.radians(self.phi_deg))


@dataclass
class BreakingCluster:
    """One flagged region with its wave-by-wave analysis."""

    i0: int
    i1: int              # inclusive node range
    x_max: float = 0.0   # crest position (free-surface maximum)
    x_min: float = 0.0   # trough position (free-surface minimum)
    h2: float = 0.0      # water depth at the crest
    h1: float = 0.0      # water depth at the trough
    direction: int = 1


@dataclass
class FlagField:
    """Per-node breaking flags plus cluster metadata."""

    f_break: np.ndarray
    clusters: list = field(default_factory=list)

    @property
    def flagged_count(self) -> int:
        return int(np.count_nonzero(self.f_break == 0))

    def intervals(self):
        return _runs(self.f_break == 0)


def _runs(mask: np.ndarray):
    """Inclusive (start, stop) index pairs of the true runs in a mask."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    cuts = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([idx[0]], idx[cuts + 1]))
    stops = np.concatenate((idx[cuts], [idx[-1]]))
    return list(zip(starts.tolist(), stops.tolist()))


def bore_froude(h2: float, h1: float) -> float:
    """Bore Froude number from the crest/trough water depths."""
    if h1 <= 0.0:
        raise ValueError("degenerate cluster: trough depth must be positive")
    r = 2.0 * h2 / h1 + 1.0
    return math.sqrt((r * r - 1.0) / 8.0)


def preflag(eta, prev_eta, h, dt, g, dx, eps, gamma, tan_phi,
            wet=None):
    """Candidate nodes from the surface-velocity and slope conditions.

    Dry nodes never become candidates (their clipped surface tracks the
    bed and would trip both conditions spuriously)."""
    eta = np.asarray(eta, float)
    n = eta.size
    if prev_eta is None or dt <= 0.0:
        fr_w = np.zeros(n)
    else:
        fr_w = np.abs(eta - prev_eta) / (dt * np.sqrt(g * (np.abs(h) + eps)))
    grad = np.zeros(n)
    d_fwd = np.abs(np.diff(eta)) / dx
    grad[:-1] = np.maximum(grad[:-1], d_fwd)
    grad[1:] = np.maximum(grad[1:], d_fwd)
    grad[1:-1] = np.maximum(grad[1:-1],
                            np.abs(eta[2:] - eta[:-2]) / (2.0 * dx))
    cand = (fr_w > gamma) | (grad >= tan_phi)
    if wet is not None:
        cand &= wet
    return cand


def analyze_window(eta, H, x, i0, i1, extend=CLUSTER_EXTEND,
                   direction=0, q=None, wet=None):
    """Crest and leading-trough analysis of a pre-flagged run.

    The crest is the surface maximum over the run extended by a few nodes;
    the trough is the first local minimum of the surface downstream of the
    crest (the dip ahead of the front), walked in the propagation
    direction and stopped at dry nodes.  Falls back to the window minimum
    when no downstream minimum exists.
    """
    n = eta.size
    a = max(0, i0 - extend)
    b = min(n - 1, i1 + extend)
    sl = slice(a, b + 1)
    im = a + int(np.argmax(eta[sl]))

    d = direction
    if d == 0 and q is not None:
        d = 1 if q[im] >= 0 else -1
    if d == 0:
        d = 1
    j = im
    limit = n - 1 if d > 0 else 0
    while j != limit:
        nxt = j + d
        if wet is not None and not wet[nxt]:
            break
        if eta[nxt] >= eta[j] and j != im:
            break
        j = nxt
    if j == im:  # no downstream descent at all: window minimum fallback
        j = a + int(np.argmin(eta[sl]))
    return im, j, float(H[im]), float(H[j])


def wave_celerity(eta, q, i_max, i_min, eps) -> float:
    """Front celerity from the crest/trough flux and elevation differences."""
    return (q[i_max] - q[i_min]) / (eta[i_max] - eta[i_min] + eps)


def surface_velocity(u, H, dx, i_crest) -> float | None:
    """Free-surface velocity at the crest, ``u - (H^2/3) u_xx``.

    The second derivative is the centred difference smoothed by one pass of
    a 5-point moving average around the crest; returns None when the crest
    sits too close to a boundary for that stencil.
    """
    n = u.size
    if i_crest < 3 or i_crest > n - 4:
        return None
    j = np.arange(i_crest - 2, i_crest + 3)
    d2 = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (dx * dx)
    d2s = float(d2.mean())
    return float(u[i_crest] - (H[i_crest] ** 2 / 3.0) * d2s)


def roller_mask(x, x_max, x_min, l_nsw):
    """Nodes inside the numerical roller centred between crest and trough."""
    return np.abs(2.0 * x - (x_max + x_min)) < l_nsw


def hygiene(flags: np.ndarray, dx: float) -> np.ndarray:
    """Erase sub-stencil rollers, then merge breakers separated by < 4 dx."""
    f = flags.copy()
    for i0, i1 in _runs(f == 0):
        if (i1 - i0) * dx < 4.0 * dx:  # fewer than 5 nodes
            f[i0: i1 + 1] = 1.0
    zero_runs = _runs(f == 0)
    for (a0, a1), (b0, b1) in zip(zero_runs[:-1], zero_runs[1:]):
        if (b0 - a1) * dx <= 4.0 * dx:
            f[a1: b0 + 1] = 0.0
    return f


def _infer_direction(cfg, q, i_crest, c_b=None) -> int:
    if cfg.direction:
        return cfg.direction
    if c_b is not None and c_b != 0.0:
        return 1 if c_b > 0 else -1
    return 1 if q[i_crest] >= 0 else -1


def detect_local(state: State, bathy: Bathymetry, cfg: DetectorConfig,
                 grid: Grid1D, eps: float,
                 eps_depth: float = 0.0) -> FlagField:
    """Non-linearity criterion: flag where |eta|/|h| exceeds E_crit, down to
    the downstream point where it recovers to E_term (dry nodes excluded)."""
    eta = state.eta
    h = bathy.h
    n = eta.size
    E = np.abs(eta) / (np.abs(h) + eps)
    wet = total_depth(eta, h) > max(eps_depth, eps)
    flags = np.ones(n)
    for i0, i1 in _runs((E > cfg.e_crit) & wet):
        i_pk = i0 + int(np.argmax(E[i0: i1 + 1]))
        d = _infer_direction(cfg, state.q, i_pk)
        if d > 0:
            j = i1
            while j < n - 1 and E[j] > cfg.e_term:
                j += 1
            flags[i0: j + 1] = 0.0
        else:
            j = i0
            while j > 0 and E[j] > cfg.e_term:
                j -= 1
            flags[j: i1 + 1] = 0.0
    flags = hygiene(flags, grid.dx)
    return _with_clusters(flags, state, bathy, grid)


def _cluster_pass(state, prev_state, bathy, dt, cfg, grid, eps, g, gate):
    """Shared hybrid/physical pipeline; ``gate`` decides per cluster."""
    eta = state.eta
    h = bathy.h
    x = grid.nodes()
    H = total_depth(eta, h)
    prev_eta = prev_state.eta if prev_state is not None else None
    wet = H > eps
    cand = preflag(eta, prev_eta, h, dt, g, grid.dx, eps, cfg.gamma,
                   cfg.tan_phi, wet)
    flags = np.ones(eta.size)
    for i0, i1 in _runs(cand):
        im, iy, h2, h1 = analyze_window(eta, H, x, i0, i1,
                                        direction=cfg.direction, q=state.q,
                                        wet=wet)
        if h1 <= 0.0:
            continue  # dry trough, cluster dropped
        if not gate(state, H, im, iy, h2, h1):
            continue
        l_nsw = cfg.c_numerical * cfg.c_roller * (h2 - h1)
        keep = roller_mask(x, x[im], x[iy], l_nsw)
        keep[i0: i1 + 1] = True  # pre-flagged nodes stay inside the roller
        flags[keep] = 0.0
    flags = hygiene(flags, grid.dx)
    return _with_clusters(flags, state, bathy, grid)


def detect_hybrid(state, prev_state, bathy, dt, cfg, grid, eps, g=9.81):
    """Slope / vertical-velocity onset with bore-Froude termination."""

    def gate(_state, H, im, iy, h2, h1):
        return bore_froude(h2, h1) >= cfg.fr_b_cr

    return _cluster_pass(state, prev_state, bathy, dt, cfg, grid, eps, g,
                         gate)


def detect_physical(state, prev_state, bathy, dt, cfg, grid, eps, g=9.81,
                    eps_depth=0.0):
    """Convective criterion: crest surface velocity against front celerity."""
    x = grid.nodes()

    def gate(st, H, im, iy, h2, h1):
        c_b = wave_celerity(st.eta, st.q, im, iy, eps)
        # rear-side guard: keep the cluster only when the trough sits
        # downstream of the crest in the propagation direction
        if c_b * (x[iy] - x[im]) < 0.0:
            return False
        u = velocity(st.q, H, eps_depth if eps_depth > 0 else eps)
        u_s = surface_velocity(u, H, grid.dx, im)
        if u_s is None:
            return False
        fr_s = abs(u_s) / (abs(c_b) + eps)
        return fr_s > cfg.fr_s_cr

    return _cluster_pass(state, prev_state, bathy, dt, cfg, grid, eps, g,
                         gate)


def _with_clusters(flags, state, bathy, grid) -> FlagField:
    """Attach per-run wave analysis metadata to the final flag field."""
    H = total_depth(state.eta, bathy.h)
    x = grid.nodes()
    clusters = []
    wet = H > 0.0
    for i0, i1 in _runs(flags == 0):
        im, iy, h2, h1 = analyze_window(state.eta, H, x, i0, i1,
                                        q=state.q, wet=wet)
        d = 1 if x[im] <= x[iy] else -1
        clusters.append(BreakingCluster(i0, i1, float(x[im]), float(x[iy]),
                                        h2, h1, d))
    return FlagField(flags, clusters)


def detect(state, prev_state, bathy, dt, cfg: DetectorConfig, grid: Grid1D,
           eps: float, g: float = 9.81, eps_depth: float = 0.0) -> FlagField:
    """Dispatch to the configured criterion."""
    if cfg.kind == "boussinesq":
        return FlagField(np.ones(state.eta.size))
    if cfg.kind == "shallow_water":
        f = np.zeros(state.eta.size)
        return _with_clusters(f, state, bathy, grid)
    if cfg.kind == "local":
        return detect_local(state, bathy, cfg, grid, eps, eps_depth)
    if cfg.kind == "hybrid":
        return detect_hybrid(state, prev_state, bathy, dt, cfg, grid, eps, g)
    return detect_physical(state, prev_state, bathy, dt, cfg, grid, eps, g,
                           eps_depth)
