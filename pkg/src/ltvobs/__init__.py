"""Two-stage adaptive observer for LTV systems with a harmonic state-matrix
term and delayed full-state measurements."""

from ltvobs.plant import SystemSpec, example_system, theta_true
from ltvobs.scenario.config import RunConfig, load_config
from ltvobs.scenario.pipeline import TraceRecord, oracle_simulate, run_pipeline

__all__ = [
    "RunConfig",
    "SystemSpec",
    "TraceRecord",
    "example_system",
    "load_config",
    "oracle_simulate",
    "run_pipeline",
    "theta_true",
]

__version__ = "0.1.0"
