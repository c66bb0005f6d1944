"""Scenario configs, the experiment runner, parameter sweeps and the invariant harness."""

from .config import ConfigError, Scenario, load_scenario, random_initial, scenario_from_dict
from .runner import RunReport, SweepResult, run_scenario, sweep
from .verify import VerifySummary, verify_all

__all__ = [
    "ConfigError",
    "RunReport",
    "Scenario",
    "SweepResult",
    "VerifySummary",
    "load_scenario",
    "random_initial",
    "run_scenario",
    "scenario_from_dict",
    "sweep",
    "verify_all",
]
