"""Experiment harness: configuration, runner, result tables and CLI."""

from .config import ClassifierSpec, ConfigError, ExperimentConfig
from .registry import make_classifier
from .runner import RunRecord, read_record, run_config, run_experiment
from .tables import assemble_table, summarise_table

__all__ = [
    "ClassifierSpec",
    "ConfigError",
    "ExperimentConfig",
    "RunRecord",
    "assemble_table",
    "make_classifier",
    "read_record",
    "run_config",
    "run_experiment",
    "summarise_table",
]
