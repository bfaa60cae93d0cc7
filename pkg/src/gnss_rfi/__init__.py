"""GNSS jamming detection from flight recordings with simple statistical baselines."""

from .baseline_range import RangeDetector, detect_flight, detect_point, fit_range
from .features import (
    FeatureKind,
    FeatureVector,
    FlightFeaturizer,
    Standardizer,
    apply_standardizer,
    compute_feature,
    extract_features,
    feature_index,
    feature_matrix,
    fit_standardizer,
)
from .gbdt import BinningTable, GBDTClassifier, fit_bins, predict_gbdt, train_gbdt
from .linear import LogisticRegressionGD, predict_logistic, train_logistic
from .metrics import ConfusionCounts, EvaluationReport, classification_metrics, evaluate, roc_auc
from .modelfile import ModelFormatError, load_model, save_model
from .pipeline import make_detector
from .recording import (
    Dataset,
    FlightRecording,
    RecordingError,
    load_dataset_manifest,
    parse_flight_csv,
    write_flight_csv,
)
from .simulator import JammingEvent, SimulationConfig, generate_dataset, simulate_dataset, simulate_flight

__version__ = "0.1.0"
