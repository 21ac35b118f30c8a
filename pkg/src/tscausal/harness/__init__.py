"""Experiment harness: ingestion, sweep orchestration, result persistence."""

from .io import read_csv, write_results_csv, write_results_json, write_timeseries_csv
from .sweep import ResultRow, SweepSpec, aggregate_trials, run_sweep

__all__ = [
    "read_csv",
    "write_results_csv",
    "write_results_json",
    "write_timeseries_csv",
    "ResultRow",
    "SweepSpec",
    "aggregate_trials",
    "run_sweep",
]
