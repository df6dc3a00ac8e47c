import numpy as np
import pytest

from nearshore.breaking import DetectorConfig, FlagField
from nearshore.forcing import SolitarySpec, solitary_celerity
from nearshore.grid import (Bathymetry, Grid1D, SchemeConfig, State,
                            StructuralError, total_depth)
from nearshore.limiting import LimiterField
from nearshore.physics import DispersiveOperator
from nearshore.scenarios import Scenario, builtin_scenario
from nearshore.timeloop import (InstabilityMonitor, StepError, cfl_dt, run,
                                step)

G = 9.81


def _flat(n=100, h0=1.0, dx=0.05):
    grid = Grid1D(0.0, n * dx, n)
    return grid, Bathymetry(np.full(grid.n_nodes, h0))


def test_cfl_dt_value():
    grid, bathy = _flat(dx=0.05)
    st = State.rest(grid)
    cfg = SchemeConfig(cfl=0.3)
    # u = 0, H = 1: dt = 0.3 * 0.05 / sqrt(9.81)
    assert cfl_dt(st, bathy, cfg, grid) == pytest.approx(
        0.3 * 0.05 / np.sqrt(G), rel=1e-12)


def test_cfl_dt_doubles_with_dx():
    cfg = SchemeConfig(cfl=0.3)
    g1, b1 = _flat(dx=0.05)
    g2, b2 = _flat(dx=0.10)
    d1 = cfl_dt(State.rest(g1), b1, cfg, g1)
    d2 = cfl_dt(State.rest(g2), b2, cfg, g2)
    assert d2 == pytest.approx(2.0 * d1)


def test_cfl_rejects_zero_nu():
    with pytest.raises(StructuralError):
        SchemeConfig(cfl=0.0)


def test_cfl_all_dry_errors():
    grid, _ = _flat()
    bathy = Bathymetry(np.full(grid.n_nodes, -1.0))
    with pytest.raises(StepError):
        cfl_dt(State.rest(grid), bathy, SchemeConfig(), grid)


def test_step_lake_at_rest_is_fixed_point():
    scn = builtin_scenario("synolakis")
    grid = scn.grid
    bathy = scn.bathymetry()
    cfg = scn.scheme
    st = State.rest(grid)
    eps = cfg.eps_for(grid)
    disp = DispersiveOperator(bathy.h, grid.dx, cfg.g)
    H = total_depth(st.eta, bathy.h)
    flags = FlagField(np.ones(grid.n_nodes))
    lims = LimiterField.compute(st.eta, H, flags.f_break, grid.dx,
                                grid.length, cfg.wet_dry_alpha, eps)
    dt = cfl_dt(st, bathy, cfg, grid)
    new, rep = step(st, bathy, flags, lims, cfg, grid, disp, dt)
    wet = H > eps
    assert np.max(np.abs(new.eta - st.eta)[wet]) <= 1e-14
    assert np.max(np.abs(new.q)[wet]) <= 1e-14
    assert rep.picard_iterations == 1


def test_step_cn_energy_conservation_linear():
    # central (sign-off), lumped-mass, non-dispersive configuration on a
    # tiny-amplitude sine: Crank-Nicolson preserves the quadratic energy
    grid, bathy = _flat(n=128, dx=0.1)
    n = grid.n_nodes
    x = grid.nodes()
    # periodic wrap joins node n-1 back to node 0: the ring has n nodes
    lam = n * grid.dx / 4.0
    a = 1e-6
    eta = a * np.sin(2 * np.pi * x / lam)
    q = np.sqrt(G) * eta
    st = State(eta, q)
    cfg = SchemeConfig(cfl=0.3, upwind_off=True, periodic=True,
                       picard_tol=1e-13)
    flags = FlagField(np.zeros(n))
    lims = LimiterField.fixed(n, mu=0.0)

    def energy(s):
        # all n nodes are distinct on the periodic ring
        return float(np.sum(G * s.eta ** 2 + s.q ** 2) / 2.0)

    e0 = energy(st)
    dt = cfl_dt(st, bathy, cfg, grid)
    for _ in range(5):
        st, rep = step(st, bathy, flags, lims, cfg, grid, None, dt)
        e1 = energy(st)
        assert abs(e1 - e0) <= 1e-10 * e0
        e0 = e1


def test_step_richardson_local_order():
    # Richardson comparison on a smooth solitary wave: errors against a
    # fine-step reference over a fixed horizon contract ~4x per halving,
    # i.e. the local error is O(dt^3) (a first-order-in-time defect would
    # contract only ~2x)
    grid, bathy = _flat(n=400, dx=0.05)
    from nearshore.forcing import solitary_initial_state
    spec = SolitarySpec(0.1, 1.0, 10.0)
    st0 = solitary_initial_state(spec, grid, bathy, G)
    n = grid.n_nodes
    cfg = SchemeConfig(picard_tol=1e-13)
    flags = FlagField(np.ones(n))
    lims = LimiterField.fixed(n, mu=1.0, omega=1.0)
    disp = DispersiveOperator(bathy.h, grid.dx, G)

    def advance(dt, k):
        state = State(st0.eta.copy(), st0.q.copy())
        for _ in range(k):
            state, _ = step(state, bathy, flags, lims, cfg, grid, disp, dt)
        return state

    horizon = 8e-3
    ref = advance(horizon / 32, 32)
    errs = [np.max(np.abs(advance(horizon / m, m).eta - ref.eta))
            for m in (1, 2, 4)]
    assert errs[0] / errs[1] > 2.8
    assert errs[1] / errs[2] > 2.8


def test_step_determinism():
    scn = builtin_scenario("wei15")
    scn = Scenario.from_manifest(scn.to_manifest())
    scn.t_end = 0.2
    r1 = run(scn)
    r2 = run(scn)
    assert np.array_equal(r1.final_state.eta, r2.final_state.eta)
    assert np.array_equal(r1.final_state.q, r2.final_state.q)


def test_run_zero_duration_echoes_initial():
    scn = builtin_scenario("wei35")
    scn.t_end = 0.0
    res = run(scn)
    st0 = scn.initial_state()
    assert np.array_equal(res.final_state.eta, st0.eta)
    assert not res.truncated


def test_instability_monitor_trips_on_growth():
    mon = InstabilityMonitor(window=10, growth_factor=5.0)
    v = 1.0
    for k in range(30):
        v *= 1.4
        mon.push(0.01 * k, v)
    assert mon.triggered


def test_instability_monitor_ignores_slow_growth():
    mon = InstabilityMonitor(window=10, growth_factor=5.0)
    v = 1.0
    for k in range(60):
        v *= 1.01
        mon.push(0.01 * k, v)
    assert not mon.triggered


def test_step_nan_aborts_with_node():
    grid, bathy = _flat(n=20)
    n = grid.n_nodes
    st = State(np.zeros(n), np.zeros(n))
    st.eta[7] = np.nan
    cfg = SchemeConfig()
    flags = FlagField(np.ones(n))
    lims = LimiterField.fixed(n)
    with pytest.raises(Exception, match="node 7"):
        step(st, bathy, flags, lims, cfg, grid, None, 1e-3)
