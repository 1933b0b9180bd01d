"""Numerical laboratory for the quasilinear wave equation u_tt = (c(u)^2 u_x)_x."""

__version__ = "0.1.0"

from .errors import QuasiwaveError  # noqa: E402
from .wavespeed import WaveSpeedModel, builtin_zabusky, builtin_constant, from_expression  # noqa: E402
from .initial_data import Grid, Scenario, Theorem, check_hypotheses  # noqa: E402
from .harness import ScenarioConfig, load_scenario, run, sweep, cross_validate  # noqa: E402

__all__ = [
    "QuasiwaveError", "WaveSpeedModel", "builtin_zabusky", "builtin_constant", "from_expression",
    "Grid", "Scenario", "Theorem", "check_hypotheses",
    "ScenarioConfig", "load_scenario", "run", "sweep", "cross_validate",
]
