"""Flow extraction, flow aggregation features and ANN-based intrusion detection."""

from ._flowagg import (
    Classifier,
    FlowTable,
    IoError,
    TrainingError,
    ValidationError,
    ZeroDayDetector,
    builtin_scenarios,
    feature_columns,
    ports_delta,
    replicate,
    resolve_config,
    rfe_select,
    run_experiment,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "Classifier",
    "FlowTable",
    "IoError",
    "TrainingError",
    "ValidationError",
    "ZeroDayDetector",
    "builtin_scenarios",
    "feature_columns",
    "ports_delta",
    "replicate",
    "resolve_config",
    "rfe_select",
    "run_experiment",
    "synthesize",
]
