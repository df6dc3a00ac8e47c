"""Assembly of the limited upwind finite element scheme.

The semi-discrete system is written as ``A * dW/dt = R(W)`` with

* ``A`` the mu-limited upwind mass operator minus the dispersive terms that
  act on dq/dt (which must be solved implicitly),
* ``R`` holding the upwind-split hydrostatic fluctuations, the friction
  folded through the mass-operator action, the eta-part of the dispersive
  integrals gated by the breaking flags, and any mass source.

Unknowns are interleaved per node as ``[eta_0, q_0, eta_1, q_1, ...]``; the
matrix couples nodes at most two apart, giving a scalar band of five
diagonals each side.  Periodic assemblies (test configurations) fall back to
a dense matrix because of the wrap-around corner blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .grid import Grid1D, SchemeConfig, total_depth, velocity
from .limiting import LimiterField
from .physics import (DispersiveOperator, auxiliary_projection,
                      friction_coefficient, interface_entropy_delta,
                      sign_matrix, swe_flux)

BAND = 5  # scalar sub/superdiagonals


class AssemblyError(RuntimeError):
    """Non-finite input detected during assembly."""


def hydrostatic_fluctuation(eta, q, h, g, eps_depth):
    """Upwind fluctuations ``phi_{i+1/2}`` for consecutive-node interfaces.

    Returns (phi_mass, phi_mom, H_avg, u_avg).  The bed jump is limited to
    the adjacent water columns so that dry walls stay in exact equilibrium.
    """
    eta = np.asarray(eta, float)
    q = np.asarray(q, float)
    h = np.asarray(h, float)
    H = total_depth(eta, h)
    fm, fq = swe_flux(eta, q, h, g, eps_depth)
    H_avg = 0.5 * (H[:-1] + H[1:])
    dh_eff = np.clip(h[1:] - h[:-1], -H[:-1], H[1:])
    phi_mass = q[1:] - q[:-1]
    phi_mom = fq[1:] - fq[:-1] - g * H_avg * dh_eff
    u_avg = velocity(0.5 * (q[:-1] + q[1:]), H_avg, eps_depth)
    return phi_mass, phi_mom, H_avg, u_avg


@dataclass
class SemiDiscreteSystem:
    """Banded system ``A dW/dt = R`` plus the snapshots used to build it.

    When built with ``dt_imp`` the banded matrix additionally carries
    ``-dt/2`` times the (linear) eta-dispersive operator so the stiff third
    derivative is solved implicitly inside the Crank-Nicolson step.
    """

    ab: np.ndarray | None     # banded LHS, shape (2*BAND+1, 2*n_nodes)
    rhs: np.ndarray           # R(W), length 2*n_nodes
    diag: np.ndarray          # upwind mass blocks, (n, 2, 2)
    left: np.ndarray          # (n, 2, 2), row i couples node i-1
    right: np.ndarray         # (n, 2, 2), row i couples node i+1
    mu_cell: np.ndarray
    f_b: np.ndarray
    left_wrap: np.ndarray | None = None   # periodic corner blocks
    right_wrap: np.ndarray | None = None
    dense: np.ndarray | None = None
    disp: object | None = None
    f_b_cell: np.ndarray | None = None
    s12: np.ndarray | None = None
    s22: np.ndarray | None = None

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self.dense is not None:
            return np.linalg.solve(self.dense, rhs)
        return solve_banded((BAND, BAND), self.ab, rhs)

    def eta_stiff_apply(self, d_eta: np.ndarray) -> np.ndarray:
        """R-contribution of the eta-dispersive terms for a perturbation."""
        if self.disp is None or self.f_b_cell is None:
            return np.zeros_like(self.rhs)
        gal = self.disp.gal_eta_matvec(d_eta)
        stab = self.disp.stab_eta_matvec(d_eta)
        out = _disp_eta_contribution(gal, stab, self.f_b, self.f_b_cell,
                                     self.s12, self.s22)
        return out.reshape(-1)

    def mass_matvec(self, v2: np.ndarray) -> np.ndarray:
        """Apply the upwind mass operator to per-node 2-vectors (n, 2)."""
        out = np.einsum("nij,nj->ni", self.diag, v2)
        out[1:] += np.einsum("nij,nj->ni", self.left[1:], v2[:-1])
        out[:-1] += np.einsum("nij,nj->ni", self.right[:-1], v2[1:])
        if self.left_wrap is not None:
            out[0] += self.left_wrap @ v2[-1]
        if self.right_wrap is not None:
            out[-1] += self.right_wrap @ v2[0]
        return out

    def to_dense(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense.copy()
        m = self.ab.shape[1]
        out = np.zeros((m, m))
        for i in range(m):
            for j in range(max(0, i - BAND), min(m, i + BAND + 1)):
                out[i, j] = self.ab[BAND + i - j, j]
        return out


def _check_finite(name, arr):
    bad = ~np.isfinite(arr)
    if bad.any():
        node = int(np.argmax(bad))
        raise AssemblyError(f"non-finite {name} at node {node}")


def assemble(state, bathy, flags, lims: LimiterField, cfg: SchemeConfig,
             grid: Grid1D, disp: DispersiveOperator | None = None,
             mass_source: np.ndarray | None = None,
             dt_imp: float | None = None,
             rhs_only: bool = False,
             skip_rhs: bool = False) -> SemiDiscreteSystem:
    """Build the full limited scheme at one state.

    ``flags`` is the per-node breaking flag array (1 = propagate, 0 =
    breaking); dispersive terms are gated by ``f_b = flags * omega``.
    ``dt_imp`` folds the linear eta-dispersive operator into the matrix for
    an implicit step of that size.
    """
    eta = state.eta
    q = state.q
    h = bathy.h
    _check_finite("eta", eta)
    _check_finite("q", q)

    n = grid.n_nodes
    dx = grid.dx
    g = cfg.g
    eps_depth = cfg.eps_for(grid)
    periodic = cfg.periodic

    H = total_depth(eta, h)
    u = velocity(q, H, eps_depth)
    fm, fq = swe_flux(eta, q, h, g, eps_depth)
    lam_m = u - np.sqrt(g * H)
    lam_p = u + np.sqrt(g * H)

    n_if = n if periodic else n - 1
    li = np.arange(n_if)
    ri = (li + 1) % n

    # interface states and fluctuations
    H_avg = 0.5 * (H[li] + H[ri])
    dh_eff = np.clip(h[ri] - h[li], -H[li], H[ri])
    phi = np.stack([q[ri] - q[li],
                    fq[ri] - fq[li] - g * H_avg * dh_eff], axis=1)
    u_avg = velocity(0.5 * (q[li] + q[ri]), H_avg, eps_depth)
    delta_ef = cfg.entropy_delta0 * np.maximum(
        np.maximum(lam_p[ri] - lam_p[li], lam_m[ri] - lam_m[li]), 0.0)

    omega_wet = lims.omega > 1e-8
    if cfg.upwind_off:
        zeros = np.zeros(n_if)
        s11 = s12 = s21 = s22 = zeros
    else:
        s11, s12, s21, s22 = sign_matrix(H_avg, u_avg, g, delta_ef,
                                         eps_depth, cfg.sign_depth_floor)
    sgn = np.empty((n_if, 2, 2))
    sgn[:, 0, 0] = s11
    sgn[:, 0, 1] = s12
    sgn[:, 1, 0] = s21
    sgn[:, 1, 1] = s22

    flags = np.asarray(flags, float)
    mu = lims.mu_cell
    if periodic:
        # wrap interface reuses the limiter of the adjacent end interfaces
        mu = np.append(mu, min(mu[0], mu[-1]))

    # --- upwind mass blocks ----------------------------------------------
    eye = np.eye(2)
    diag = np.tile(dx * eye, (n, 1, 1))
    left = np.zeros((n, 2, 2))
    right = np.zeros((n, 2, 2))
    left_wrap = right_wrap = None

    # rows degenerate to the lumped block where the wet/dry cut-off has
    # collapsed (nodes within the stencil of a dry front).  The mask is a
    # pure function of the step-frozen limiter field so it cannot flip
    # between Picard iterates at a wetting front.
    wet = omega_wet
    half_mu = (0.5 * dx * mu)[:, None, None]
    to_left_diag = half_mu * (-eye / 3.0 - 0.5 * sgn)
    to_left_off = half_mu * (eye / 3.0 - 0.5 * sgn)
    to_right_diag = half_mu * (-eye / 3.0 + 0.5 * sgn)
    to_right_off = half_mu * (eye / 3.0 + 0.5 * sgn)

    wl = wet[li][:, None, None]
    wr = wet[ri][:, None, None]
    np.add.at(diag, li, wl * to_left_diag)
    np.add.at(diag, ri, wr * to_right_diag)
    if periodic:
        right[li[:-1]] += (wl * to_left_off)[:-1]
        left[ri[:-1]] += (wr * to_right_off)[:-1]
        right_wrap = (wl * to_left_off)[-1]
        left_wrap = (wr * to_right_off)[-1]
    else:
        right[li] += wl * to_left_off
        left[ri] += wr * to_right_off

    # --- right-hand side ---------------------------------------------------
    rhs2 = np.zeros((n, 2))
    f_b = flags * lims.omega
    active = disp is not None and bool(f_b.any())
    if active and periodic:
        raise NotImplementedError("dispersive terms with periodic boundaries")
    f_b_cell = np.minimum(f_b[:-1], f_b[1:]) if active else None

    if not skip_rhs:
        s_phi = np.einsum("kij,kj->ki", sgn, phi)
        rhs2[li] -= 0.5 * (phi - s_phi)
        rhs2[ri] -= 0.5 * (phi + s_phi)

        if not cfg.upwind_off and cfg.entropy_delta0 > 0.0:
            # entropy fix: the sign smoothing alone cannot dissipate at a
            # sonic point (lambda/|lambda|_fix -> 0), so add the Roe-form
            # viscosity (|lambda|_fix - |lambda|) on the state jump; it
            # vanishes on lake-at-rest states (Delta W = 0)
            c_avg = np.sqrt(g * np.maximum(H_avg, 0.0))
            lam_ma = u_avg - c_avg
            lam_pa = u_avg + c_avg
            from .physics import harten_fix
            df_m = np.maximum(harten_fix(lam_ma, delta_ef) - np.abs(lam_ma),
                              0.0)
            df_p = np.maximum(harten_fix(lam_pa, delta_ef) - np.abs(lam_pa),
                              0.0)
            fix_on = (df_m > 0) | (df_p > 0)
            fix_on &= (H[li] > eps_depth) & (H[ri] > eps_depth)
            if np.any(fix_on):
                df_m = np.where(fix_on, df_m, 0.0)
                df_p = np.where(fix_on, df_p, 0.0)
                span = np.where(fix_on, np.maximum(lam_pa - lam_ma, 1e-30),
                                1.0)
                e11 = (df_m * lam_pa - df_p * lam_ma) / span
                e12 = (df_p - df_m) / span
                e21 = lam_pa * lam_ma * (df_m - df_p) / span
                e22 = (df_p * lam_pa - df_m * lam_ma) / span
                d_eta = eta[ri] - eta[li]
                d_q = q[ri] - q[li]
                ex_m = 0.5 * (e11 * d_eta + e12 * d_q)
                ex_q = 0.5 * (e21 * d_eta + e22 * d_q)
                rhs2[li, 0] += ex_m
                rhs2[li, 1] += ex_q
                rhs2[ri, 0] -= ex_m
                rhs2[ri, 1] -= ex_q

        if cfg.manning_n != 0.0:
            cf = friction_coefficient(q, H, cfg.manning_n, g, eps_depth)
            sf = np.zeros((n, 2))
            sf[:, 1] = cf * q
            tmp = SemiDiscreteSystem(None, rhs2.reshape(-1), diag, left,
                                     right, mu, flags, left_wrap, right_wrap)
            rhs2 -= tmp.mass_matvec(sf)

        if mass_source is not None:
            rhs2[:, 0] += dx * mass_source

        if active:
            gal_eta = disp.gal_eta_matvec(eta)
            stab_eta = disp.stab_eta_matvec(eta)
            rhs2 += _disp_eta_contribution(gal_eta, stab_eta, f_b, f_b_cell,
                                           s12, s22)

    rhs = rhs2.reshape(-1)

    if rhs_only:
        return SemiDiscreteSystem(None, rhs, diag, left, right, mu, f_b,
                                  left_wrap, right_wrap,
                                  disp=disp if active else None,
                                  f_b_cell=f_b_cell, s12=s12, s22=s22)

    # --- matrix assembly ---------------------------------------------------
    m = 2 * n
    if periodic:
        dense = np.zeros((m, m))
        for i in range(n):
            dense[2 * i: 2 * i + 2, 2 * i: 2 * i + 2] += diag[i]
            if i > 0:
                dense[2 * i: 2 * i + 2, 2 * i - 2: 2 * i] += left[i]
            if i < n - 1:
                dense[2 * i: 2 * i + 2, 2 * i + 2: 2 * i + 4] += right[i]
        dense[0:2, m - 2: m] += left_wrap
        dense[m - 2: m, 0:2] += right_wrap
        return SemiDiscreteSystem(None, rhs, diag, left, right, mu, f_b,
                                  left_wrap, right_wrap, dense=dense)

    ab = np.zeros((2 * BAND + 1, m))

    def band_add(d_node, r, c, node_idx, vals):
        # rows 2*node_idx + r, cols 2*(node_idx + d_node) + c
        cols = 2 * (node_idx + d_node) + c
        ab[BAND - 2 * d_node + r - c, cols] += vals

    idx_all = np.arange(n)
    for r in range(2):
        for c in range(2):
            band_add(0, r, c, idx_all, diag[:, r, c])
            band_add(-1, r, c, idx_all[1:], left[1:, r, c])
            band_add(1, r, c, idx_all[:-1], right[:-1, r, c])

    if active:
        _add_disp_banded(band_add, disp, f_b, f_b_cell, s12, s22, n)
        if dt_imp is not None:
            _add_disp_eta_banded(band_add, disp, f_b, f_b_cell, s12, s22, n,
                                 0.5 * dt_imp)

    return SemiDiscreteSystem(ab, rhs, diag, left, right, mu, f_b,
                              disp=disp if active else None,
                              f_b_cell=f_b_cell, s12=s12, s22=s22)


def _disp_eta_contribution(gal_eta, stab_eta, f_b, f_b_cell, s12, s22):
    """Per-node 2-vector R-contribution of the eta-dispersive terms."""
    n = gal_eta.size
    out = np.zeros((n, 2))
    out[:, 1] += f_b * gal_eta
    wS = f_b_cell * stab_eta
    out[:-1, 0] += -0.5 * s12 * wS
    out[:-1, 1] += -0.5 * s22 * wS
    out[1:, 0] += 0.5 * s12 * wS
    out[1:, 1] += 0.5 * s22 * wS
    return out


def _galerkin_qdot_blocks(disp: DispersiveOperator, f_b: np.ndarray):
    """Coefficients of the Galerkin dq/dt term as (left, center, right)."""
    n = disp.n_nodes
    cl = np.zeros(n)   # on qdot[i-1]
    cc = np.zeros(n)   # on qdot[i]
    cr = np.zeros(n)   # on qdot[i+1]
    # node i from its right cell c = i: gal_l_coeff[c] * (qdot[i+1] - qdot[i])
    cc[:-1] += -disp.gal_l_coeff
    cr[:-1] += disp.gal_l_coeff
    # node i from its left cell c = i-1: gal_r_coeff[c] * (qdot[i] - qdot[i-1])
    cc[1:] += disp.gal_r_coeff
    cl[1:] += -disp.gal_r_coeff
    return f_b * cl, f_b * cc, f_b * cr


def _add_disp_banded(band_add, disp, f_b, f_b_cell, s12, s22, n):
    """Move the dq/dt-dispersive terms into the matrix (LHS -= coefficient)."""
    cl, cc, cr = _galerkin_qdot_blocks(disp, f_b)
    idx = np.arange(n)
    band_add(0, 1, 1, idx, -cc)
    band_add(-1, 1, 1, idx[1:], -cl[1:])
    band_add(1, 1, 1, idx[:-1], -cr[:-1])

    # stabilization: cell c contributes -/+ f_b_cell * s_(r,2)/2 * band
    # coefficients to the rows of its left/right nodes
    cells = np.arange(n - 1)
    for off in range(4):
        nodes = cells - 1 + off
        ok = (nodes >= 0) & (nodes <= n - 1)
        coef = disp.stab_band[:, off]
        for r, s_row in ((0, s12), (1, s22)):
            w = 0.5 * f_b_cell * s_row * coef
            band_add(off - 1, r, 1, cells[ok], w[ok])
            band_add(off - 2, r, 1, (cells + 1)[ok], -w[ok])


def _add_disp_eta_banded(band_add, disp, f_b, f_b_cell, s12, s22, n, factor):
    """Fold ``-factor`` times the eta-dispersive operator into the matrix."""
    for off in range(5):
        d = off - 2
        i = np.arange(max(0, -d), min(n, n - d))
        band_add(d, 1, 0, i, -factor * f_b[i] * disp.gal_eta_band[i, off])

    cells = np.arange(n - 1)
    for off in range(4):
        nodes = cells - 1 + off
        ok = (nodes >= 0) & (nodes <= n - 1)
        coef = disp.stab_eta_band[:, off]
        for r, s_row in ((0, s12), (1, s22)):
            w = 0.5 * f_b_cell * s_row * coef
            band_add(off - 1, r, 0, cells[ok], factor * w[ok])
            band_add(off - 2, r, 0, (cells + 1)[ok], -factor * w[ok])
