"""Flight-level detectors assembled from the featurizer, scaler and classifiers."""

from __future__ import annotations

from sklearn.pipeline import Pipeline

from .baseline_range import RangeDetector
from .features import FlightFeaturizer, Standardizer
from .gbdt import GBDTClassifier
from .linear import LogisticRegressionGD

MODEL_KINDS = ("range", "linear", "gbdt")

_LINEAR_KEYS = {"l2", "max_iter", "tol", "threshold"}
_GBDT_KEYS = {"n_trees", "learning_rate", "max_leaves", "min_samples_leaf", "l2_leaf",
              "max_bins", "seed", "threshold"}
_RANGE_KEYS = {"normal_only"}


def make_detector(kind: str, **hyper):
    """Unfitted estimator that consumes a list of FlightRecording.

    Unknown hyperparameters for the chosen kind are ignored so one set of
    CLI overrides can serve every kind.
    """
    if kind == "range":
        return RangeDetector(**{k: v for k, v in hyper.items() if k in _RANGE_KEYS})
    if kind == "linear":
        clf = LogisticRegressionGD(**{k: v for k, v in hyper.items() if k in _LINEAR_KEYS})
    elif kind == "gbdt":
        clf = GBDTClassifier(**{k: v for k, v in hyper.items() if k in _GBDT_KEYS})
    else:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {', '.join(MODEL_KINDS)}")
    return Pipeline([("features", FlightFeaturizer()), ("scale", Standardizer()), ("model", clf)])


def detector_kind(model) -> str:
    if isinstance(model, RangeDetector):
        return "range"
    clf = model[-1]
    if isinstance(clf, LogisticRegressionGD):
        return "linear"
    if isinstance(clf, GBDTClassifier):
        return "gbdt"
    raise TypeError(f"unsupported detector {type(model).__name__}")
