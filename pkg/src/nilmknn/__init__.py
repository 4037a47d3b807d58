"""Appliance classification from sub-metered power traces with exact k-nearest neighbors."""

from .errors import (
    ConfigError,
    DataError,
    DataWarning,
    DimensionError,
    EmptyDatasetError,
    NilmError,
)
from .harness import ExperimentConfig, render_report, run_experiment, stratified_split
from .knn import KnnModel, class_probabilities, euclidean_distance, fit, k_nearest, predict, predict_many
from .metrics import aggregate_report, build_confusion, per_class_metrics
from .preprocess import LabeledDataset, build_dataset, detect_segments, extract_windows
from .redd import House, PowerTrace, load_house, parse_channel, parse_labels, write_channel

__version__ = "0.1.0"
