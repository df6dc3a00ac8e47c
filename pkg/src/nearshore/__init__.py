"""1D nearshore wave propagation with a hybrid dispersive/shallow-water
breaking closure, three breaking-detection criteria and a benchmark harness.
"""

from .breaking import DetectorConfig, FlagField, bore_froude, detect
from .forcing import (PeriodicSpec, SolitarySpec, SpongeLayer,
                      solitary_celerity, solitary_initial_state)
from .grid import (Bathymetry, Grid1D, SchemeConfig, State, total_depth,
                   velocity)
from .limiting import LimiterField
from .scenarios import Scenario, builtin_scenario, scenario_names
from .timeloop import RunResult, StepReport, cfl_dt, run, step

__version__ = "0.1.0"

__all__ = [
    "Bathymetry", "DetectorConfig", "FlagField", "Grid1D", "LimiterField",
    "PeriodicSpec", "RunResult", "Scenario", "SchemeConfig", "SolitarySpec",
    "SpongeLayer", "State", "StepReport", "bore_froude", "builtin_scenario",
    "cfl_dt", "detect", "run", "scenario_names", "solitary_celerity",
    "solitary_initial_state", "step", "total_depth", "velocity",
]
