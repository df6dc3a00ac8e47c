"""Uniform 1D grid, bathymetry, evolved unknowns and derived hydraulics.

Sign conventions used throughout the package: the still-water depth ``h`` is
positive offshore and negative above the still-water line, so the bed
elevation is ``-h`` and the total water depth is ``H = h + eta`` (clipped at
zero on dry land).  The evolved unknowns are the free surface ``eta`` and the
volume flux ``q = H u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GRAVITY = 9.81


class StructuralError(ValueError):
    """Inconsistent grid metadata or mismatched array shapes."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of ``cells`` intervals covering ``[x_left, x_left + length]``."""

    x_left: float
    length: float
    cells: int

    def __post_init__(self):
        if self.cells < 1:
            raise StructuralError(f"cell count must be positive, got {self.cells}")
        if not self.length > 0:
            raise StructuralError(f"domain length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.cells

    @property
    def n_nodes(self) -> int:
        return self.cells + 1

    def nodes(self) -> np.ndarray:
        return self.x_left + self.dx * np.arange(self.n_nodes)

    def node_index(self, x: float) -> int:
        """Nearest node index for a physical coordinate."""
        i = int(round((x - self.x_left) / self.dx))
        return min(max(i, 0), self.cells)


@dataclass
class Bathymetry:
    """Per-node still-water depth, piecewise linear between nodes."""

    h: np.ndarray

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float)

    @classmethod
    def from_profile(cls, grid: Grid1D, breakpoints) -> "Bathymetry":
        """Interpolate depth from ``[(x, h), ...]`` breakpoints.

        Depths are extended flat beyond the first/last breakpoint.
        """
        pts = sorted(breakpoints)
        xs = np.array([p[0] for p in pts], dtype=float)
        hs = np.array([p[1] for p in pts], dtype=float)
        return cls(np.interp(grid.nodes(), xs, hs))

    def matching(self, grid: Grid1D) -> bool:
        return self.h.shape == (grid.n_nodes,)


@dataclass
class State:
    """Free surface, volume flux and simulated time."""

    eta: np.ndarray
    q: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        self.q = np.asarray(self.q, dtype=float)

    @classmethod
    def rest(cls, grid: Grid1D, eta0: float = 0.0) -> "State":
        n = grid.n_nodes
        return cls(np.full(n, eta0), np.zeros(n), 0.0)

    def copy(self) -> "State":
        return State(self.eta.copy(), self.q.copy(), self.t)


@dataclass
class SchemeConfig:
    """Discretization constants shared by the whole solver stack."""

    cfl: float = 0.3
    g: float = GRAVITY
    manning_n: float = 0.0
    wet_dry_alpha: float = 10.0
    wet_dry_form: str = "local"  # or "published" (global-max numerator)
    eps_depth: float | None = None  # wet threshold; defaults to (dx/L)^2
    sign_depth_floor: float = 1e-4  # m; regularizes sign(A) in thin films
    entropy_delta0: float = 1.0
    picard_tol: float = 1e-8
    picard_max: int = 50
    periodic: bool = False
    upwind_off: bool = False  # test hook: central (sign(A)=0) spatial operator

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise StructuralError(f"CFL must lie in (0, 1], got {self.cfl}")
        if self.wet_dry_alpha < 0:
            raise StructuralError("wet/dry alpha must be non-negative")
        if self.picard_tol <= 0 or self.picard_max < 1:
            raise StructuralError("Picard tolerances must be positive")

    def eps_for(self, grid: Grid1D) -> float:
        if self.eps_depth is not None:
            return self.eps_depth
        return (grid.dx / grid.length) ** 2


def total_depth(eta: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Total water depth ``H = max(h + eta, 0)``."""
    eta = np.asarray(eta, dtype=float)
    h = np.asarray(h, dtype=float)
    if eta.shape != h.shape:
        raise StructuralError(
            f"eta and h must match, got {eta.shape} vs {h.shape}"
        )
    return np.maximum(h + eta, 0.0)


def clipped_count(eta: np.ndarray, h: np.ndarray) -> int:
    """Number of nodes where ``h + eta`` was negative (clipped dry)."""
    if np.shape(eta) != np.shape(h):
        raise StructuralError("eta and h must match")
    return int(np.count_nonzero(np.asarray(h) + np.asarray(eta) < 0.0))


def velocity(q: np.ndarray, H: np.ndarray, eps_depth: float) -> np.ndarray:
    """Depth-averaged velocity ``u = q / H`` regularized on dry nodes."""
    q = np.asarray(q, dtype=float)
    H = np.asarray(H, dtype=float)
    u = q / np.maximum(H, eps_depth)
    return np.where(H > eps_depth, u, 0.0)
