"""Initial conditions, internal wave generation and sponge layers.

The solitary wave uses the exact celerity of the underlying dispersive model,

    c^2 = g h0 * a^2 (1 + a/3) / (2 (a - ln(1 + a))),   a = A / h0,

obtained by integrating the travelling-wave momentum balance from the far
field to the crest; it exceeds sqrt(g h0) for every positive amplitude and
tends to sqrt(g (h0 + A)) as A -> 0.  The profile is a sech^2 ansatz whose
width is matched to the same first integral at half height.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Bathymetry, Grid1D, State
from .physics import BETA, BIG_B


@dataclass
class SolitarySpec:
    amplitude: float
    h0: float
    x0: float

    def __post_init__(self):
        if not 0.0 <= self.amplitude / self.h0 < 0.78:
            raise ValueError(
                f"A/h0 = {self.amplitude / self.h0:.3f} outside the stable "
                "solitary range [0, 0.78)")


@dataclass
class PeriodicSpec:
    amplitude: float
    period: float
    x0: float
    width: float = 0.0      # Gaussian source width; 0 = derive from lambda
    strength: float = 0.0   # mass-source magnitude D; 0 = linear estimate

    def __post_init__(self):
        if self.amplitude <= 0 or self.period <= 0:
            raise ValueError("amplitude and period must be positive")


@dataclass
class SpongeLayer:
    side: str          # "left" | "right"
    width: float
    m_max: float       # peak damping rate (1/s)
    exponent: int = 2

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError(f"sponge side must be left/right, got {self.side}")
        if self.width < 0:
            raise ValueError("sponge width must be non-negative")


def solitary_celerity(amplitude: float, h0: float, g: float) -> float:
    """Exact solitary-wave celerity of the dispersive model (> sqrt(g h0))."""
    if amplitude <= 0.0:
        return math.sqrt(g * h0)
    a = amplitude / h0
    ratio = a * a * (1.0 + a / 3.0) / (2.0 * (a - math.log1p(a)))
    return math.sqrt(g * h0 * ratio)


def _first_integral(eta, h0, g, c2):
    """Potential Phi(eta) of the travelling-wave equation (negative inside)."""
    return ((g * h0 - c2) * eta * eta / 2.0
            + c2 * (eta * eta / 2.0 - h0 * eta
                    + h0 * h0 * math.log1p(eta / h0))
            + g * eta ** 3 / 6.0)


def solitary_wavenumber(amplitude: float, h0: float, g: float) -> float:
    """Decay rate K of the sech^2 ansatz, matched at half height.

    The exact profile satisfies (eta')^2 P / 2 = Phi(eta) with
    P = h0^2 (beta g h0 - B c^2); equating with the sech^2 identity
    (eta')^2 = K^2 A^2 at eta = A/2 pins K.
    """
    c = solitary_celerity(amplitude, h0, g)
    c2 = c * c
    P = h0 * h0 * (BETA * g * h0 - BIG_B * c2)
    phi_half = _first_integral(amplitude / 2.0, h0, g, c2)
    k2 = 2.0 * phi_half / (P * amplitude * amplitude)
    if k2 <= 0.0:
        raise ValueError("no solitary profile for these parameters")
    return math.sqrt(k2)


def exact_solitary_profile(amplitude: float, h0: float, g: float,
                           xi: np.ndarray) -> np.ndarray:
    """Travelling-wave profile eta(|x - x0|) of the dispersive model.

    Quadrature of the first integral, xi(eta) = int d eta / sqrt(2 Phi / P)
    from the crest (where Phi vanishes by the celerity condition) down the
    homoclinic orbit, with P = h0^2 (beta g h0 - B c^2) < 0.  Shooting the
    profile ODE outward is unstable (the tail has a growing mode), the
    quadrature form is not.
    """
    from scipy.integrate import quad

    c2 = solitary_celerity(amplitude, h0, g) ** 2
    P = h0 * h0 * (BETA * g * h0 - BIG_B * c2)
    k_tail = 0.5 * math.sqrt((c2 - g * h0) / (h0 * h0 * (BIG_B * c2
                                                         - BETA * g * h0)))

    def slope_inv(eta):
        val = 2.0 * _first_integral(eta, h0, g, c2) / P
        return 1.0 / math.sqrt(max(val, 1e-300))

    # eta samples: dense near the crest (integrable 1/sqrt singularity)
    # and log-spaced down the exponential tail
    gap = amplitude * np.geomspace(1e-9, 1.0, 120)[:-1]
    crest_side = amplitude - gap[::-1]
    tail_side = amplitude * np.geomspace(1e-12, 0.5, 160)
    etas = np.unique(np.concatenate([tail_side, crest_side]))[::-1]

    xis = np.zeros(etas.size)
    for j in range(1, etas.size):
        seg, _ = quad(slope_inv, etas[j], etas[j - 1], limit=200)
        xis[j] = xis[j - 1] + seg

    out = np.zeros_like(np.asarray(xi, float))
    axi = np.abs(np.asarray(xi, float))
    inside = axi <= xis[-1]
    out[inside] = np.interp(axi[inside], xis, etas)
    # exponential continuation below the last tabulated point
    out[~inside] = etas[-1] * np.exp(-2.0 * k_tail * (axi[~inside]
                                                      - xis[-1]))
    return np.clip(out, 0.0, amplitude)


def solitary_initial_state(spec: SolitarySpec, grid: Grid1D,
                           bathy: Bathymetry, g: float,
                           k_override: float | None = None,
                           profile: str = "sech2") -> State:
    """Solitary free surface moving with the exact celerity (q = c eta).

    ``profile='exact'`` integrates the model's own travelling-wave profile;
    ``profile='sech2'`` (or a ``k_override``) uses the sech^2 ansatz.
    """
    if spec.amplitude == 0.0:
        return State.rest(grid)
    x = grid.nodes()
    if profile == "sech2" or k_override is not None:
        k = k_override if k_override is not None else solitary_wavenumber(
            spec.amplitude, spec.h0, g)
        eta = spec.amplitude / np.cosh(k * (x - spec.x0)) ** 2
    else:
        eta = exact_solitary_profile(spec.amplitude, spec.h0, g,
                                     x - spec.x0)
    # truncate the far tail and keep the beach dry at t = 0
    eta[eta < 1e-9 * spec.amplitude] = 0.0
    eta[bathy.h <= 0.0] = 0.0
    c = solitary_celerity(spec.amplitude, spec.h0, g)
    return State(eta, c * eta, 0.0)


def linear_wavelength(period: float, h0: float, g: float) -> float:
    """Airy wavelength from the linear dispersion relation."""
    omega = 2.0 * math.pi / period
    target = omega * omega * h0 / g
    kh = math.sqrt(target) if target < 1 else target  # starting guess
    for _ in range(100):
        f = kh * math.tanh(kh) - target
        df = math.tanh(kh) + kh / math.cosh(kh) ** 2
        step = f / df
        kh -= step
        if abs(step) < 1e-14:
            break
    return 2.0 * math.pi * h0 / kh


def source_defaults(spec: PeriodicSpec, h0: float, g: float):
    """Linear-theory width and strength for the Gaussian mass source."""
    lam = linear_wavelength(spec.period, h0, g)
    width = spec.width if spec.width > 0 else lam / 8.0
    c = lam / spec.period
    strength = spec.strength if spec.strength > 0 else (
        2.0 * spec.amplitude * c / (math.sqrt(math.pi) * width))
    return width, strength


def periodic_source(spec: PeriodicSpec, grid: Grid1D, t: float, h0: float,
                    g: float) -> np.ndarray:
    """Per-node mass-equation source at time t."""
    width, strength = source_defaults(spec, h0, g)
    x = grid.nodes()
    shape = np.exp(-((x - spec.x0) / width) ** 2)
    return strength * shape * math.sin(2.0 * math.pi * t / spec.period)


def sponge_profile(layers, grid: Grid1D) -> np.ndarray:
    """Per-node damping rate m(x) >= 0 from all sponge layers."""
    x = grid.nodes()
    m = np.zeros_like(x)
    for layer in layers:
        if layer.width == 0.0:
            continue
        if layer.side == "left":
            x_wall = grid.x_left
            xi = (x_wall + layer.width - x) / layer.width
        else:
            x_wall = grid.x_left + grid.length
            xi = (x - (x_wall - layer.width)) / layer.width
        ramp = np.clip(xi, 0.0, 1.0) ** layer.exponent
        m = np.maximum(m, layer.m_max * ramp)
    return m


def apply_sponge(state: State, m: np.ndarray, dt: float) -> None:
    """Relax eta and q toward rest inside the layers (in place)."""
    factor = np.maximum(1.0 - dt * m, 0.0)
    state.eta *= factor
    state.q *= factor
