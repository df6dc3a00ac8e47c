"""Continuous-model ingredients of the wave model.

Shallow-water flux and Jacobian sign (with an entropy fix), Manning friction,
and the enhanced-Boussinesq dispersive operator

    D(eta, q) = B h^2 d_xxt q + beta g h^3 d_xxx eta
                + (1/3) h h_x d_xt q + 2 beta g h^2 h_x d_xx eta,

with beta = 1/15 and B = beta + 1/3, evaluated in weak form on linear finite
elements.  Third derivatives are handled through nodal auxiliary projections
``w`` approximating second derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import velocity

BETA = 1.0 / 15.0
BIG_B = BETA + 1.0 / 3.0

# 2-point Gauss rule on the unit interval
_GAUSS_S = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
_GAUSS_W = np.array([0.5, 0.5])


def swe_flux(eta, q, h, g, eps_depth):
    """Shallow-water flux ``F = [q, u q + g H^2 / 2]`` per node."""
    H = np.maximum(np.asarray(h, float) + np.asarray(eta, float), 0.0)
    u = velocity(q, H, eps_depth)
    return np.asarray(q, float), u * q + 0.5 * g * H * H


@dataclass
class EigenDecomp:
    """Eigenstructure of the shallow-water Jacobian at one state."""

    lam_minus: float
    lam_plus: float
    right: np.ndarray
    left: np.ndarray


def eigen_decomp(H: float, u: float, g: float) -> EigenDecomp:
    c = np.sqrt(g * max(H, 0.0))
    lm, lp = u - c, u + c
    right = np.array([[1.0, 1.0], [lm, lp]])
    span = lp - lm
    left = np.array([[lp, -1.0], [-lm, 1.0]]) / span
    return EigenDecomp(lm, lp, right, left)


def harten_fix(lam: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Harten-Hyman smoothed absolute value, |lam| >= delta/2 near sonic points."""
    alam = np.abs(lam)
    small = alam < delta
    safe = np.where(delta > 0.0, delta, 1.0)
    smoothed = (lam * lam + delta * delta) / (2.0 * safe)
    return np.where(small & (delta > 0.0), smoothed, alam)


def sign_matrix(H, u, g, delta, eps_depth, depth_floor=0.0):
    """Entries of ``sign(A)`` at interface states, vectorized.

    Returns four arrays (s11, s12, s21, s22).  Interfaces with ``H`` at or
    below the wet threshold get the identity (full upwinding from the wet
    side).  ``delta`` is the per-interface entropy-fix width;
    ``depth_floor`` bounds the eigenvector span so the 1/c entry cannot
    blow up (and chatter between solver iterates) in films thinner than
    that depth.
    """
    H = np.asarray(H, float)
    u = np.asarray(u, float)
    c = np.sqrt(g * np.maximum(H, 0.0))
    lm, lp = u - c, u + c
    delta = np.broadcast_to(np.asarray(delta, float), H.shape)

    rm = lm / np.maximum(harten_fix(lm, delta), 1e-300)
    rp = lp / np.maximum(harten_fix(lp, delta), 1e-300)

    span = np.maximum(lp - lm, max(2.0 * math.sqrt(g * depth_floor), 1e-300))
    s11 = (rm * lp - rp * lm) / span
    s12 = (rp - rm) / span
    s21 = lp * lm * (rm - rp) / span
    s22 = (rp * lp - rm * lm) / span

    dry = H <= eps_depth
    s11 = np.where(dry, 1.0, s11)
    s12 = np.where(dry, 0.0, s12)
    s21 = np.where(dry, 0.0, s21)
    s22 = np.where(dry, 1.0, s22)
    return s11, s12, s21, s22


def interface_entropy_delta(lm_node, lp_node, delta0):
    """Entropy-fix width per interface from nodal eigenvalue jumps."""
    dlp = lp_node[1:] - lp_node[:-1]
    dlm = lm_node[1:] - lm_node[:-1]
    return delta0 * np.maximum(np.maximum(dlp, dlm), 0.0)


def friction_coefficient(q, H, n, g, eps_depth):
    """Manning friction coefficient ``C_f = g n^2 |u| / H^(4/3)``, zero when dry."""
    if n == 0.0:
        return np.zeros_like(np.asarray(q, float))
    H = np.asarray(H, float)
    u = velocity(q, H, eps_depth)
    wet = H > eps_depth
    Hs = np.maximum(H, eps_depth)
    cf = g * n * n * np.abs(u) / Hs ** (4.0 / 3.0)
    return np.where(wet, cf, 0.0)


def _projection_stencil(j: int, n_nodes: int):
    """Node offsets and weights of the second-difference projection at node j."""
    if j == 0:
        return (0, 1, 2), (1.0, -2.0, 1.0)
    if j == n_nodes - 1:
        return (j - 2, j - 1, j), (1.0, -2.0, 1.0)
    return (j - 1, j, j + 1), (1.0, -2.0, 1.0)


def auxiliary_projection(field: np.ndarray, dx: float) -> np.ndarray:
    """Lumped-mass projection of the second derivative of a nodal field.

    Interior nodes carry the central second difference; the end nodes reuse
    the first interior stencil (one-sided closure).
    """
    f = np.asarray(field, float)
    w = np.empty_like(f)
    w[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (dx * dx)
    w[0] = (f[2] - 2.0 * f[1] + f[0]) / (dx * dx)
    w[-1] = (f[-1] - 2.0 * f[-2] + f[-3]) / (dx * dx)
    return w


class DispersiveOperator:
    """Weak-form dispersive terms on a fixed bathymetry.

    Precomputes per-cell Gauss data and the (time-independent) coefficient
    stencils of all terms acting on ``dq/dt``; the state-dependent parts take
    the nodal auxiliary field ``w_eta`` at call time.  All outputs are the
    momentum row only (the mass row of D vanishes identically).
    """

    def __init__(self, h: np.ndarray, dx: float, g: float,
                 beta: float = BETA, big_b: float = BIG_B):
        self.h = np.asarray(h, float)
        self.dx = float(dx)
        self.g = g
        self.beta = beta
        self.big_b = big_b
        self.n_nodes = self.h.size
        self.n_cells = self.n_nodes - 1

        hl = self.h[:-1]
        hr = self.h[1:]
        s = _GAUSS_S[:, None]
        wq = (_GAUSS_W * self.dx)[:, None]
        hg = hl[None, :] * (1.0 - s) + hr[None, :] * s

        self.dh = (hr - hl) / self.dx
        self.int_h = (wq * hg).sum(axis=0)
        self.int_h2 = (wq * hg ** 2).sum(axis=0)
        self.int_h3 = (wq * hg ** 3).sum(axis=0)
        self.int_h_l = (wq * hg * (1.0 - s)).sum(axis=0)
        self.int_h_r = (wq * hg * s).sum(axis=0)
        self.int_h2_l = (wq * hg ** 2 * (1.0 - s)).sum(axis=0)
        self.int_h2_r = (wq * hg ** 2 * s).sum(axis=0)
        self.int_h3_l = (wq * hg ** 3 * (1.0 - s)).sum(axis=0)
        self.int_h3_r = (wq * hg ** 3 * s).sum(axis=0)
        self.int_h2_ll = (wq * hg ** 2 * (1.0 - s) ** 2).sum(axis=0)
        self.int_h2_lr = (wq * hg ** 2 * (1.0 - s) * s).sum(axis=0)
        self.int_h2_rr = (wq * hg ** 2 * s * s).sum(axis=0)

        self._build_galerkin_qdot()
        self._build_stab_qdot()
        self._build_eta_bands()

        # precomputed gather indices for the banded matvecs
        base_n = np.arange(self.n_nodes) - 2
        self._gal_idx = [np.clip(base_n + off, 0, self.n_nodes - 1)
                         for off in range(5)]
        base_c = np.arange(self.n_cells) - 1
        self._cell_idx = [np.clip(base_c + off, 0, self.n_nodes - 1)
                          for off in range(4)]

    # -- dq/dt stencils ----------------------------------------------------

    def _build_galerkin_qdot(self):
        """Per-cell coefficients of the cell slope of dq/dt in the Galerkin
        integral, for the left and right test functions:

            -B int (2 h h_x phi + h^2 phi_x) dx + (1/3) h_x int h phi dx
        """
        dx, B = self.dx, self.big_b
        slope_l = -B * (2.0 * self.dh * self.int_h_l - self.int_h2 / dx) \
            + (self.dh / 3.0) * self.int_h_l
        slope_r = -B * (2.0 * self.dh * self.int_h_r + self.int_h2 / dx) \
            + (self.dh / 3.0) * self.int_h_r
        # multiplied at runtime by (qdot[c+1] - qdot[c]) / dx
        self.gal_l_coeff = slope_l / dx
        self.gal_r_coeff = slope_r / dx

    def _build_stab_qdot(self):
        """Band of the dq/dt part of the stabilization cell integral,

            int [ B h^2 wdot_h + (1/3) h h_x (dq/dt)_x ] dx

        expanded onto nodal dq/dt through the projection stencils.  Stored as
        a (n_cells, 4) band over nodes c-1 .. c+2; the one-sided boundary
        projections stay inside that band.
        """
        dx = self.dx
        nc = self.n_cells
        wl = self.big_b * self.int_h2_l / dx ** 2
        wr = self.big_b * self.int_h2_r / dx ** 2
        grad = (self.dh / 3.0) * self.int_h / dx

        band = np.zeros((nc, 4))
        base = np.arange(nc) - 1
        for c in range(nc):
            for node, factor in ((c, wl[c]), (c + 1, wr[c])):
                idx, wgt = _projection_stencil(node, self.n_nodes)
                for k, wv in zip(idx, wgt):
                    band[c, k - base[c]] += factor * wv
            band[c, 1] += -grad[c]
            band[c, 2] += grad[c]
        self.stab_band = band
        self.stab_base = base

    def _build_eta_bands(self):
        """Banded form of the eta-dispersive terms (linear, h-only
        coefficients), chained through the auxiliary projection.

        ``gal_eta_band``: (n_nodes, 5) over nodes i-2 .. i+2, the Galerkin
        integral per node.  ``stab_eta_band``: (n_cells, 4) over nodes
        c-1 .. c+2, the cell integral D_{i+1/2}.  These reproduce the
        quadrature evaluations exactly and let the stiff third-derivative
        terms sit inside the implicit solve.
        """
        dx = self.dx
        nc = self.n_cells
        bg = self.beta * self.g
        dd = dx * dx

        # coefficients of (w_c, w_{c+1}) in each integral
        gl_a = -bg * self.int_h3_l / dx + 2.0 * bg * self.dh * self.int_h2_ll
        gl_b = bg * self.int_h3_l / dx + 2.0 * bg * self.dh * self.int_h2_lr
        gr_a = -bg * self.int_h3_r / dx + 2.0 * bg * self.dh * self.int_h2_lr
        gr_b = bg * self.int_h3_r / dx + 2.0 * bg * self.dh * self.int_h2_rr
        st_a = -bg * self.int_h3 / dx + 2.0 * bg * self.dh * self.int_h2_l
        st_b = bg * self.int_h3 / dx + 2.0 * bg * self.dh * self.int_h2_r

        gal = np.zeros((self.n_nodes, 5))   # offsets -2 .. +2
        stab = np.zeros((nc, 4))            # nodes c-1 .. c+2
        for c in range(nc):
            proj_l = _projection_stencil(c, self.n_nodes)
            proj_r = _projection_stencil(c + 1, self.n_nodes)
            for (idx, wgt), f_node, f_cell in (
                    (proj_l, (gl_a[c], gr_a[c]), st_a[c]),
                    (proj_r, (gl_b[c], gr_b[c]), st_b[c])):
                for k, wv in zip(idx, wgt):
                    gal[c, k - (c - 2)] += f_node[0] * wv / dd
                    gal[c + 1, k - (c + 1 - 2)] += f_node[1] * wv / dd
                    stab[c, k - (c - 1)] += f_cell * wv / dd
        self.gal_eta_band = gal
        self.stab_eta_band = stab

    # -- evaluations ---------------------------------------------------------

    def galerkin_eta(self, w_eta: np.ndarray) -> np.ndarray:
        """Per-node Galerkin integral of the eta-dispersive terms."""
        bg = self.beta * self.g
        dwdx = (w_eta[1:] - w_eta[:-1]) / self.dx
        s = _GAUSS_S[:, None]
        wq = (_GAUSS_W * self.dx)[:, None]
        hg = self.h[:-1][None, :] * (1.0 - s) + self.h[1:][None, :] * s
        wg = w_eta[:-1][None, :] * (1.0 - s) + w_eta[1:][None, :] * s
        t_l = bg * dwdx * self.int_h3_l \
            + 2.0 * bg * self.dh * (wq * hg ** 2 * (1.0 - s) * wg).sum(axis=0)
        t_r = bg * dwdx * self.int_h3_r \
            + 2.0 * bg * self.dh * (wq * hg ** 2 * s * wg).sum(axis=0)

        out = np.zeros(self.n_nodes)
        out[:-1] += t_l
        out[1:] += t_r
        return out

    def galerkin_qdot(self, qdot: np.ndarray) -> np.ndarray:
        """Per-node Galerkin integral of the dq/dt-dispersive terms."""
        dq = (qdot[1:] - qdot[:-1])
        out = np.zeros(self.n_nodes)
        out[:-1] += self.gal_l_coeff * dq
        out[1:] += self.gal_r_coeff * dq
        return out

    def stab_eta(self, w_eta: np.ndarray) -> np.ndarray:
        """Per-cell integral D_{i+1/2} of the eta-dispersive terms."""
        bg = self.beta * self.g
        dwdx = (w_eta[1:] - w_eta[:-1]) / self.dx
        return (bg * self.int_h3 * dwdx
                + 2.0 * bg * self.dh
                * (self.int_h2_l * w_eta[:-1] + self.int_h2_r * w_eta[1:]))

    def stab_qdot(self, qdot: np.ndarray) -> np.ndarray:
        """Per-cell integral D_{i+1/2} of the dq/dt-dispersive terms."""
        out = np.zeros(self.n_cells)
        for off in range(4):
            # out-of-range offsets carry zero coefficients by construction
            out += self.stab_band[:, off] * qdot[self._cell_idx[off]]
        return out

    def gal_eta_matvec(self, eta: np.ndarray) -> np.ndarray:
        """Banded application of the Galerkin eta terms (equals
        ``galerkin_eta(auxiliary_projection(eta))`` to round-off)."""
        out = np.zeros(self.n_nodes)
        for off in range(5):
            out += self.gal_eta_band[:, off] * eta[self._gal_idx[off]]
        return out

    def stab_eta_matvec(self, eta: np.ndarray) -> np.ndarray:
        """Banded application of the stabilization eta terms."""
        out = np.zeros(self.n_cells)
        for off in range(4):
            out += self.stab_eta_band[:, off] * eta[self._cell_idx[off]]
        return out

    def cell_integrals(self, w_eta: np.ndarray, qdot: np.ndarray):
        """Galerkin (per node) and stabilization (per cell) momentum terms."""
        gal = self.galerkin_eta(w_eta) + self.galerkin_qdot(qdot)
        stab = self.stab_eta(w_eta) + self.stab_qdot(qdot)
        return gal, stab
