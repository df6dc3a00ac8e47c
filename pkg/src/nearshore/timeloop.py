"""Implicit Crank-Nicolson time integration and the scenario run driver.

Each step freezes the breaking flags and limiter fields at the current
state, then Picard-iterates the non-linear Crank-Nicolson system

    A(W*) (W^{n+1} - W^n) = dt/2 [R(W^n) + R(W^{n+1})],

re-assembling the banded operator at the latest iterate until the update
stagnates.  Dry nodes are clipped after every accepted step.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .breaking import DetectorConfig, FlagField, detect, surface_velocity, wave_celerity
from .discretization import assemble
from .forcing import (apply_sponge, solitary_initial_state, source_defaults,
                      sponge_profile)
from .grid import State, total_depth, velocity
from .limiting import LimiterField
from .physics import DispersiveOperator


STALL_RTOL = 1e-3  # accept a stagnated Picard plateau below this update


class StepError(RuntimeError):
    """Picard non-convergence or non-finite state during a step."""

    def __init__(self, message, residual_history=None, node=None):
        super().__init__(message)
        self.residual_history = residual_history or []
        self.node = node


@dataclass
class StepReport:
    dt: float
    picard_iterations: int
    residual: float
    min_depth: float
    flag_count: int
    monitor_value: float
    clipped: int = 0


def cfl_dt(state: State, bathy, cfg, grid) -> float:
    """CFL-limited time step from the fastest wet characteristic."""
    H = total_depth(state.eta, bathy.h)
    eps = cfg.eps_for(grid)
    wet = H > eps
    if not wet.any():
        raise StepError("all-dry domain: no CFL speed available")
    u = velocity(state.q, H, eps)
    speed = float(np.max(np.abs(u[wet]) + np.sqrt(cfg.g * H[wet])))
    if speed <= 0.0:
        raise StepError("zero characteristic speed")
    dt = cfg.cfl * grid.dx / speed
    if dt <= 0.0:
        raise StepError("non-positive time step")
    return dt


def curvature_energy(eta: np.ndarray) -> float:
    """Second-difference energy of the free surface (instability monitor)."""
    d2 = eta[2:] - 2.0 * eta[1:-1] + eta[:-2]
    return float(np.dot(d2, d2))


def step(state: State, bathy, flags: FlagField, lims: LimiterField, cfg,
         grid, disp: DispersiveOperator | None, dt: float,
         mass_source: np.ndarray | None = None,
         dw_seed: np.ndarray | None = None):
    """One Crank-Nicolson step with frozen flags/limiters.

    ``dw_seed`` warm-starts the Picard iteration (the previous step's
    increment); it changes the iteration path, not the converged state.
    Returns (new_state, StepReport)."""
    f = flags.f_break
    w_n = np.stack([state.eta, state.q], axis=1).reshape(-1)
    history = []
    converged = False
    iters = 0
    rel = 0.0
    if dw_seed is not None and dw_seed.shape == w_n.shape \
            and np.all(np.isfinite(dw_seed)):
        prev_dw = dw_seed
    else:
        prev_dw = np.zeros_like(w_n)
    sys_n = assemble(state, bathy, f, lims, cfg, grid, disp, mass_source,
                     dt_imp=dt, rhs_only=bool(np.any(prev_dw)))
    rhs_n = sys_n.rhs
    w_it = w_n + prev_dw
    iterate = State(w_it[0::2].copy(), w_it[1::2].copy(), state.t + dt)
    seeded = bool(np.any(prev_dw))
    best = math.inf
    stall = 0
    for k in range(cfg.picard_max):
        iters = k + 1
        if k > 0 or seeded:
            # second-order in time requires the frozen operator (sign
            # matrices included) at the midpoint state; R stays at the ends
            mid = State(0.5 * (state.eta + iterate.eta),
                        0.5 * (state.q + iterate.q), state.t + 0.5 * dt)
            sys_mid = assemble(mid, bathy, f, lims, cfg, grid, disp,
                               mass_source, dt_imp=dt, skip_rhs=True)
            rhs_k = assemble(iterate, bathy, f, lims, cfg, grid, disp,
                             mass_source, rhs_only=True).rhs
        else:
            sys_mid = sys_n
            rhs_k = rhs_n
        rhs_solve = 0.5 * dt * (rhs_n + rhs_k)
        if k > 0 or seeded:
            # the eta-stiff terms sit in the matrix; remove their double
            # count from the explicit iterate residual
            rhs_solve -= 0.5 * dt * sys_mid.eta_stiff_apply(
                iterate.eta - state.eta)
        try:
            dw = sys_mid.solve(rhs_solve)
        except ValueError as exc:
            raise StepError(f"linear solve failed: {exc}", history) from exc
        if not np.all(np.isfinite(dw)):
            node = int(np.argmax(~np.isfinite(dw))) // 2
            raise StepError(f"non-finite update at node {node}", history,
                            node)
        if np.max(np.abs(dw)) > 1e4 * (1.0 + float(np.max(np.abs(w_n)))):
            raise StepError("diverging Picard update", history)
        num = float(np.max(np.abs(dw - prev_dw)))
        den = float(np.max(np.abs(dw)))
        rel = num / (den + 1e-300)
        history.append(rel)
        w_new = w_n + dw
        iterate = State(w_new[0::2].copy(), w_new[1::2].copy(), state.t + dt)
        prev_dw = dw
        # absolute floor: updates at the arithmetic noise of the hydrostatic
        # flux cancellation (~eps * g H^2) cannot contract further
        floor = 1e-13 * dt * max(1.0, float(np.max(np.abs(w_n))))
        if num <= floor or rel < cfg.picard_tol:
            converged = True
            break
        # at captured shocks the update norm plateaus well above the smooth
        # tolerance; accept a stagnated iteration if it is still small
        if num < 0.98 * best:
            best = num
            stall = 0
        else:
            stall += 1
            if stall >= 5 and rel <= STALL_RTOL:
                converged = True
                break
    if not converged:
        if rel <= STALL_RTOL:
            converged = True
        else:
            raise StepError(
                f"Picard stalled after {cfg.picard_max} iterations "
                f"(last relative update {rel:.3e})", history)

    # dry-node clipping
    eta = iterate.eta
    q = iterate.q
    neg = bathy.h + eta < 0.0
    clipped = int(np.count_nonzero(neg))
    if clipped:
        eta = np.where(neg, -bathy.h, eta)
    H = total_depth(eta, bathy.h)
    eps = cfg.eps_for(grid)
    q = np.where(H > eps, q, 0.0)
    new_state = State(eta, q, state.t + dt)

    report = StepReport(dt=dt, picard_iterations=iters, residual=rel,
                        min_depth=float(H.min()),
                        flag_count=flags.flagged_count,
                        monitor_value=curvature_energy(eta),
                        clipped=clipped)
    return new_state, report


@dataclass
class InstabilityMonitor:
    """Flags monotone growth of the curvature energy over a step window."""

    window: int = 50
    growth_factor: float = 10.0
    history: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def push(self, t: float, value: float):
        self.history.append(value)
        if len(self.history) <= self.window:
            return
        self.history.pop(0)
        vals = self.history
        if vals[0] <= 0.0:
            return
        increasing = all(b > a for a, b in zip(vals[:-1], vals[1:]))
        if increasing and vals[-1] / vals[0] > self.growth_factor:
            self.events.append((t, vals[-1]))
            self.history = vals[-1:]

    @property
    def triggered(self) -> bool:
        return bool(self.events)


@dataclass
class CrestTraceSample:
    t: float
    x_crest: float
    c_b: float
    u_s: float
    breaking: bool


@dataclass
class RunResult:
    """Everything a run produces, before any file is written."""

    scenario: object
    gauge_times: list = field(default_factory=list)
    gauge_eta: list = field(default_factory=list)      # rows per sample
    profiles: list = field(default_factory=list)       # (t, eta, q, flags)
    flag_timeline: list = field(default_factory=list)  # (t, [(i0, i1), ...])
    crest_trace: list = field(default_factory=list)
    onset_events: list = field(default_factory=list)   # (t, x_center)
    termination_events: list = field(default_factory=list)
    history: list = field(default_factory=list)        # (t, eta array) samples
    reports: list = field(default_factory=list)
    monitor: InstabilityMonitor = field(default_factory=InstabilityMonitor)
    truncated: bool = False
    truncation_reason: str = ""
    final_state: State | None = None

    @property
    def first_onset_t(self) -> float | None:
        return self.onset_events[0][0] if self.onset_events else None


def _crest_sample(state, bathy, grid, eps, eps_depth, direction, h0):
    """Celerity and crest-surface-velocity diagnostics at the main crest."""
    eta = state.eta
    H = total_depth(eta, bathy.h)
    im = int(np.argmax(eta))
    d = direction if direction else (1 if state.q[im] >= 0 else -1)
    span = max(4, int(round(10.0 * h0 / grid.dx)))
    if d > 0:
        lo, hi = im, min(eta.size - 1, im + span)
    else:
        lo, hi = max(0, im - span), im
    iy = lo + int(np.argmin(eta[lo: hi + 1]))
    c_b = wave_celerity(eta, state.q, im, iy, eps)
    u = velocity(state.q, H, eps_depth)
    u_s = surface_velocity(u, H, grid.dx, im)
    x = grid.nodes()
    return x[im], c_b, (u_s if u_s is not None else 0.0)


def run(scenario, progress: bool = False) -> RunResult:
    """Advance a scenario to its end time, recording all diagnostics."""
    grid = scenario.grid
    bathy = scenario.bathymetry()
    cfg = scenario.scheme
    det = scenario.detector
    g = cfg.g
    eps = cfg.eps_for(grid)
    disp = DispersiveOperator(bathy.h, grid.dx, g)
    sponge_m = sponge_profile(scenario.sponges, grid)
    have_sponge = bool(np.any(sponge_m > 0))

    state = scenario.initial_state()
    prev_state = None
    prev_dt = 0.0
    dw_seed = None

    res = RunResult(scenario=scenario)
    gauge_idx = [grid.node_index(xg) for xg in scenario.gauges]
    next_gauge_t = 0.0
    snapshot_times = sorted(scenario.snapshot_times())
    snap_i = 0
    next_hist_t = 0.0
    active_lineages = []  # [(i0, i1, onset_t)]

    src_shape = None
    if scenario.periodic_wave is not None:
        width, strength = source_defaults(scenario.periodic_wave,
                                          scenario.h0, g)
        x = grid.nodes()
        src_shape = strength * np.exp(
            -((x - scenario.periodic_wave.x0) / width) ** 2)

    def record_gauges(st):
        if gauge_idx:
            res.gauge_times.append(st.t)
            res.gauge_eta.append([float(st.eta[i]) for i in gauge_idx])

    record_gauges(state)
    if scenario.history_dt is not None:
        res.history.append((state.t, state.eta.copy()))
        next_hist_t = scenario.history_dt

    t_end = scenario.t_end
    while state.t < t_end - 1e-12:
        try:
            dt = cfl_dt(state, bathy, cfg, grid)
            dt = min(dt, t_end - state.t)

            flags = detect(state, prev_state, bathy, prev_dt, det, grid,
                           eps, g, eps)
            H = total_depth(state.eta, bathy.h)
            lims = LimiterField.compute(state.eta, H, flags.f_break, grid.dx,
                                        grid.length, cfg.wet_dry_alpha, eps,
                                        cfg.wet_dry_form)
            source = None
            if src_shape is not None:
                t_mid = state.t + 0.5 * dt
                source = src_shape * math.sin(
                    2.0 * math.pi * t_mid / scenario.periodic_wave.period)

            try:
                new_state, report = step(state, bathy, flags, lims, cfg,
                                         grid, disp, dt, source, dw_seed)
            except StepError:
                if dw_seed is None:
                    raise
                # warm starts can trip near wetting fronts; retry cold
                new_state, report = step(state, bathy, flags, lims, cfg,
                                         grid, disp, dt, source, None)
            dw_seed = np.stack([new_state.eta - state.eta,
                                new_state.q - state.q], axis=1).reshape(-1)
            if have_sponge:
                apply_sponge(new_state, sponge_m, dt)
        except StepError as exc:
            res.truncated = True
            res.truncation_reason = str(exc)
            break

        # lineage bookkeeping: overlap-chain the flagged intervals
        intervals = flags.intervals()
        new_lineages = []
        x = grid.nodes()
        for (i0, i1) in intervals:
            matched = None
            for lin in active_lineages:
                if i0 <= lin[1] and i1 >= lin[0]:
                    matched = lin
                    break
            if matched is None:
                res.onset_events.append((state.t, float(
                    0.5 * (x[i0] + x[i1]))))
                new_lineages.append((i0, i1, state.t))
            else:
                new_lineages.append((i0, i1, matched[2]))
        for lin in active_lineages:
            if not any(i0 <= lin[1] and i1 >= lin[0] for i0, i1 in intervals):
                res.termination_events.append((state.t, lin[2]))
        active_lineages = new_lineages
        # record the timeline whenever the flagged set changes (including
        # back to empty) so lineages can be re-derived offline
        if not res.flag_timeline:
            if intervals:
                res.flag_timeline.append((state.t, intervals))
        elif intervals != res.flag_timeline[-1][1]:
            res.flag_timeline.append((state.t, intervals))

        if scenario.track_crest:
            xc, c_b, u_s = _crest_sample(state, bathy, grid, eps, eps,
                                         det.direction, scenario.h0)
            res.crest_trace.append(CrestTraceSample(
                state.t, xc, c_b, u_s, bool(intervals)))

        res.monitor.push(new_state.t, report.monitor_value)
        res.reports.append(report)

        prev_state = state
        prev_dt = dt
        state = new_state

        if state.t >= next_gauge_t - 1e-12:
            record_gauges(state)
            next_gauge_t += scenario.gauge_dt
        if scenario.history_dt is not None and \
                state.t >= next_hist_t - 1e-12:
            res.history.append((state.t, state.eta.copy()))
            next_hist_t += scenario.history_dt
        while snap_i < len(snapshot_times) and \
                state.t >= snapshot_times[snap_i] - 1e-12:
            res.profiles.append((state.t, state.eta.copy(), state.q.copy(),
                                 flags.f_break.copy()))
            snap_i += 1

        if progress and len(res.reports) % 500 == 0:
            print(f"  t = {state.t:9.4f} s  dt = {dt:.3e}  "
                  f"flags = {report.flag_count:5d}  "
                  f"picard = {report.picard_iterations}",
                  file=sys.stderr)

    for lin in active_lineages:
        res.termination_events.append((state.t, lin[2]))
    res.final_state = state
    return res
