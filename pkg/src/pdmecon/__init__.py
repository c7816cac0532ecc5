"""Predictive-maintenance analytics for filtration units.

Sensor ingestion, lag-feature forecasting with walk-forward evaluation,
rule-based fault detection, preventive-vs-predictive plant simulation, and a
Monte Carlo cost-benefit engine, plus a CLI that chains them into
reproducible runs.
"""

from importlib import resources as _resources
from pathlib import Path

__version__ = "0.1.0"


def data_path(name: str) -> Path:
    """Path to a bundled data file (sample ledger, scenario configs)."""
    return Path(str(_resources.files("pdmecon").joinpath("data", name)))
