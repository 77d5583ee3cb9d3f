"""Runnable scenarios: configuration, analytic profiles and drivers."""

from .config import SCENARIOS, ConfigError, ScenarioConfig, build_config, load_config
from .scenarios import (
    Check,
    Report,
    run_absorb,
    run_convergence,
    run_decay,
    run_inequalities,
    run_regularity,
    run_scenario,
    run_tail,
    simulate_ensemble,
)

__all__ = [
    "SCENARIOS",
    "Check",
    "ConfigError",
    "Report",
    "ScenarioConfig",
    "build_config",
    "load_config",
    "run_absorb",
    "run_convergence",
    "run_decay",
    "run_inequalities",
    "run_regularity",
    "run_scenario",
    "run_tail",
    "simulate_ensemble",
]
