"""Benchmark scenario catalog and manifest (de)serialization.

Six built-in setups cover solitary-wave shoaling on 1:35 and 1:15 slopes,
solitary run-up on a 1:19.85 beach, periodic waves over a submerged bar, and
two monochromatic shore cases.  Every parameter can be overridden; the
manifest echoes the full configuration so a run can be reproduced exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property

import numpy as np

from .breaking import DetectorConfig
from .forcing import (PeriodicSpec, SolitarySpec, SpongeLayer,
                      solitary_celerity, solitary_initial_state,
                      solitary_wavenumber)
from .grid import Bathymetry, Grid1D, SchemeConfig, State


class CatalogError(KeyError):
    """Unknown scenario name."""


@dataclass
class Scenario:
    name: str
    x_left: float
    length: float
    dx: float
    bathy_points: list
    scheme: SchemeConfig
    detector: DetectorConfig
    solitary: SolitarySpec | None = None
    solitary_k: float | None = None   # calibrated profile width, if any
    periodic_wave: PeriodicSpec | None = None
    sponges: list = field(default_factory=list)
    gauges: list = field(default_factory=list)
    t_end: float = 1.0
    h0: float = 1.0
    snapshot_tprimes: list = field(default_factory=list)
    gauge_dt: float = 0.05
    history_dt: float | None = None
    track_crest: bool = False
    description: str = ""
    ursell: float | None = None

    @cached_property
    def grid(self) -> Grid1D:
        cells = int(round(self.length / self.dx))
        return Grid1D(self.x_left, self.length, cells)

    def bathymetry(self) -> Bathymetry:
        return Bathymetry.from_profile(self.grid, self.bathy_points)

    def initial_state(self) -> State:
        if self.solitary is not None:
            return solitary_initial_state(self.solitary, self.grid,
                                          self.bathymetry(), self.scheme.g,
                                          k_override=self.solitary_k)
        return State.rest(self.grid)

    def tprime(self, t) -> float:
        return t * math.sqrt(self.scheme.g / self.h0)

    def time_of(self, tprime: float) -> float:
        return tprime * math.sqrt(self.h0 / self.scheme.g)

    def snapshot_times(self):
        return [self.time_of(tp) for tp in self.snapshot_tprimes]

    # -- manifest ---------------------------------------------------------

    def to_manifest(self) -> dict:
        d = {
            "name": self.name,
            "x_left": self.x_left,
            "length": self.length,
            "dx": self.dx,
            "bathy_points": [list(p) for p in self.bathy_points],
            "scheme": asdict(self.scheme),
            "detector": asdict(self.detector),
            "solitary": asdict(self.solitary) if self.solitary else None,
            "solitary_k": self.solitary_k,
            "periodic_wave": (asdict(self.periodic_wave)
                              if self.periodic_wave else None),
            "sponges": [asdict(s) for s in self.sponges],
            "gauges": list(self.gauges),
            "t_end": self.t_end,
            "h0": self.h0,
            "snapshot_tprimes": list(self.snapshot_tprimes),
            "gauge_dt": self.gauge_dt,
            "history_dt": self.history_dt,
            "track_crest": self.track_crest,
            "description": self.description,
            "ursell": self.ursell,
        }
        return d

    @classmethod
    def from_manifest(cls, d: dict) -> "Scenario":
        return cls(
            name=d["name"],
            x_left=d["x_left"],
            length=d["length"],
            dx=d["dx"],
            bathy_points=[tuple(p) for p in d["bathy_points"]],
            scheme=SchemeConfig(**d["scheme"]),
            detector=DetectorConfig(**d["detector"]),
            solitary=SolitarySpec(**d["solitary"]) if d.get("solitary") else None,
            solitary_k=d.get("solitary_k"),
            periodic_wave=(PeriodicSpec(**d["periodic_wave"])
                           if d.get("periodic_wave") else None),
            sponges=[SpongeLayer(**s) for s in d.get("sponges", [])],
            gauges=list(d.get("gauges", [])),
            t_end=d["t_end"],
            h0=d["h0"],
            snapshot_tprimes=list(d.get("snapshot_tprimes", [])),
            gauge_dt=d.get("gauge_dt", 0.05),
            history_dt=d.get("history_dt"),
            track_crest=d.get("track_crest", False),
            description=d.get("description", ""),
            ursell=d.get("ursell"),
        )


def _solitary_sponge_rate(amplitude, h0, g):
    """m_max = 10 / T_char with T_char the solitary transit time scale."""
    c = solitary_celerity(amplitude, h0, g)
    k = solitary_wavenumber(amplitude, h0, g)
    t_char = 2.0 / (k * c)
    return 10.0 / t_char


def _wei_case(name, inv_slope, amplitude, t_end_tprime, snapshots,
              description):
    g = 9.81
    m = _solitary_sponge_rate(amplitude, 1.0, g)
    # constant slope between x = 0 and 35 m, flat continuation beyond; the
    # 1:35 case runs out of depth exactly at the domain end of the slope
    h35 = 1.0 - 35.0 / inv_slope
    return Scenario(
        name=name,
        x_left=-12.0,
        length=52.0,
        dx=0.05,
        bathy_points=[(-12.0, 1.0), (0.0, 1.0), (35.0, h35), (40.0, h35)],
        scheme=SchemeConfig(cfl=0.3, manning_n=0.0),
        detector=DetectorConfig(kind="hybrid", direction=1),
        solitary=SolitarySpec(amplitude=amplitude, h0=1.0, x0=0.0),
        sponges=[SpongeLayer("left", 3.0, m), SpongeLayer("right", 3.0, m)],
        gauges=[],
        t_end=t_end_tprime * math.sqrt(1.0 / g),
        h0=1.0,
        snapshot_tprimes=snapshots,
        gauge_dt=0.05,
        track_crest=True,
        description=description,
    )


def _build_wei35() -> Scenario:
    return _wei_case("wei35", 35.0, 0.2, 94.0,
                     [16.24, 20.64, 24.03, 25.94],
                     "Solitary wave A=0.2 m shoaling on a 1:35 slope")


def _build_wei15() -> Scenario:
    return _wei_case("wei15", 15.0, 0.3, 13.0,
                     [3.23, 6.0, 8.4, 11.32],
                     "Solitary wave A=0.3 m shoaling on a 1:15 slope")


def _build_synolakis() -> Scenario:
    g = 9.81
    slope = 1.0 / 19.85
    amplitude = 0.28
    k = solitary_wavenumber(amplitude, 1.0, g)
    half_len = math.acosh(math.sqrt(1.0 / 0.05)) / k
    m = _solitary_sponge_rate(amplitude, 1.0, g)
    x_right = 25.0
    return Scenario(
        name="synolakis",
        x_left=-20.0,
        length=45.0,
        dx=0.1,
        bathy_points=[(-20.0, 1.0), (0.0, 1.0),
                      (x_right, 1.0 - x_right * slope)],
        scheme=SchemeConfig(cfl=0.3, manning_n=0.01),
        detector=DetectorConfig(kind="hybrid", direction=1),
        solitary=SolitarySpec(amplitude=amplitude, h0=1.0, x0=-half_len),
        sponges=[SpongeLayer("left", 3.0, m)],
        gauges=[],
        t_end=82.0 * math.sqrt(1.0 / g),
        h0=1.0,
        snapshot_tprimes=[15.0, 25.0, 30.0, 45.0, 55.0, 80.0],
        gauge_dt=0.05,
        track_crest=True,
        description="Solitary wave A=0.28 m run-up on a 1:19.85 beach",
    )


def _build_beji_bar() -> Scenario:
    period = 2.525
    return Scenario(
        name="beji_bar",
        x_left=0.0,
        length=60.0,
        dx=0.04,
        bathy_points=[(0.0, 0.4), (28.0, 0.4), (34.0, 0.1), (36.0, 0.1),
                      (39.0, 0.4), (60.0, 0.4)],
        scheme=SchemeConfig(cfl=0.3, manning_n=0.0),
        detector=DetectorConfig(kind="hybrid", e_crit=0.6, gamma=0.3,
                                phi_deg=30.0, fr_s_cr=0.75, direction=1),
        periodic_wave=PeriodicSpec(amplitude=0.027, period=period, x0=22.0),
        sponges=[SpongeLayer("left", 3.0, 10.0 / period),
                 SpongeLayer("right", 3.0, 10.0 / period)],
        gauges=[28.0, 34.0, 35.0, 36.0],
        t_end=35.0,
        h0=0.4,
        gauge_dt=period / 60.0,
        description=("Periodic wave A=0.027 m, T=2.525 s over a submerged "
                     "bar; gauge positions approximate the experiment "
                     "sketch (first gauge used for re-phasing)"),
    )


def _build_hansen(name, period, amplitude, ursell) -> Scenario:
    return Scenario(
        name=name,
        x_left=-12.0,
        length=26.5,
        dx=0.025,
        bathy_points=[(-12.0, 0.36), (0.0, 0.36),
                      (14.5, 0.36 - 14.5 / 32.26)],
        scheme=SchemeConfig(cfl=0.3, manning_n=0.0),
        detector=DetectorConfig(kind="hybrid", direction=1),
        periodic_wave=PeriodicSpec(amplitude=amplitude, period=period,
                                   x0=-6.0),
        sponges=[SpongeLayer("left", 3.0, 10.0 / period)],
        gauges=[],
        t_end=40.0,
        h0=0.36,
        gauge_dt=period / 60.0,
        history_dt=period / 40.0,
        description=(f"Monochromatic shore waves, T={period} s, "
                     f"A={amplitude} m on a 1:32.26 slope"),
        ursell=ursell,
    )


_BUILDERS = {
    "wei35": _build_wei35,
    "wei15": _build_wei15,
    "synolakis": _build_synolakis,
    "beji_bar": _build_beji_bar,
    "hansen_051041": lambda: _build_hansen("hansen_051041", 2.0, 0.018,
                                           4.8077),
    "hansen_031041": lambda: _build_hansen("hansen_031041", 10.0 / 3.0,
                                           0.0215, 17.5588),
}


def scenario_names():
    return sorted(_BUILDERS)


def builtin_scenario(name: str) -> Scenario:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise CatalogError(
            f"unknown scenario {name!r}; valid names: "
            + ", ".join(scenario_names())) from None
    return builder()


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(scn: Scenario, overrides: dict) -> Scenario:
    """Apply dotted-path overrides (e.g. ``detector.gamma=0.3``)."""
    manifest = scn.to_manifest()
    for key, value in overrides.items():
        if isinstance(value, str):
            value = _parse_value(value)
        parts = key.split(".")
        target = manifest
        for p in parts[:-1]:
            if p not in target or not isinstance(target[p], dict):
                raise CatalogError(f"unknown override group {p!r} in {key!r}")
            target = target[p]
        if parts[-1] not in target:
            raise CatalogError(f"unknown override key {key!r}")
        target[parts[-1]] = value
    return Scenario.from_manifest(manifest)
