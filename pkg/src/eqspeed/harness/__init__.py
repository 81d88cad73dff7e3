from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .io import (
    HarnessIOError,
    read_report,
    read_trajectory_csv,
    save_experiment,
    write_report,
    write_trajectory_csv,
)
from .report import ExperimentReport, TrialRecord, aggregate_trials
from .runner import run_experiment, run_sweep, run_trial, sweep_configs
