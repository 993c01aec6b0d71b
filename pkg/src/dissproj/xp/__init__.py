"""Experiment drivers, configuration and the command-line interface."""

from dissproj.xp.config import ExperimentConfig, load_config, parse_config
from dissproj.xp.experiments import (
    SweepResult,
    coherence_trace,
    holonomy_sweep,
    kato_report,
    robustness_report,
    run_experiment,
    scaling_sweep,
    spectrum_sweep,
)

__all__ = [
    "ExperimentConfig",
    "SweepResult",
    "coherence_trace",
    "holonomy_sweep",
    "kato_report",
    "load_config",
    "parse_config",
    "robustness_report",
    "run_experiment",
    "scaling_sweep",
    "spectrum_sweep",
]
