"""Per-channel summary statistics and train-set standardization.

Every flight maps to ``37 channels x 10 statistics = 370`` values laid out
channel-major: index ``channel * 10 + kind``. Statistics use present
samples only. A channel with no present samples contributes ten zeros and
is flagged absent.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, validate_data

from .recording import CHANNEL_NAMES, N_CHANNELS, FlightRecording


class FeatureKind(enum.IntEnum):
    SUM = 0
    MEDIAN = 1
    MEAN = 2
    LENGTH = 3
    STD = 4
    VARIANCE = 5
    RMS = 6
    MAXIMUM = 7
    ABS_MAXIMUM = 8
    MINIMUM = 9


N_KINDS = len(FeatureKind)
N_FEATURES = N_CHANNELS * N_KINDS  # 370


def feature_index(channel: int, kind: FeatureKind) -> int:
    if not 0 <= channel < N_CHANNELS:
        raise IndexError(f"channel {channel} out of range")
    return channel * N_KINDS + int(kind)


def feature_names() -> list[str]:
    return [f"{ch}__{k.name.lower()}" for ch in CHANNEL_NAMES for k in FeatureKind]


def _summary(x: np.ndarray) -> np.ndarray:
    """All ten statistics of a non-empty 1-D float array, in FeatureKind order."""
    n = x.shape[0]
    mean = x.sum() / n
    var = np.dot(x - mean, x - mean) / n
    return np.array([
        x.sum(),
        np.median(x),
        mean,
        float(n),
        np.sqrt(var),
        var,
        np.sqrt(np.dot(x, x) / n),
        x.max(),
        np.abs(x).max(),
        x.min(),
    ])


def compute_feature(kind: FeatureKind, series) -> float:
    """Evaluate one statistic; population (divisor n) forms for spread."""
    x = np.asarray(series, dtype=np.float64).reshape(-1)
    if x.shape[0] == 0:
        raise ValueError("cannot compute a feature of an empty series")
    return float(_summary(x)[int(FeatureKind(kind))])


@dataclass(frozen=True)
class FeatureVector:
    flight_id: str
    values: np.ndarray
    channel_present: np.ndarray


def extract_features(recording: FlightRecording) -> FeatureVector:
    values = np.zeros(N_FEATURES)
    flags = np.zeros(N_CHANNELS, dtype=bool)
    for c in range(N_CHANNELS):
        x = recording.present_values(c)
        if x.shape[0]:
            values[c * N_KINDS:(c + 1) * N_KINDS] = _summary(x)
            flags[c] = True
    return FeatureVector(recording.flight_id, values, flags)


def feature_matrix(recordings: Iterable[FlightRecording]) -> np.ndarray:
    rows = [extract_features(r).values for r in recordings]
    if not rows:
        return np.empty((0, N_FEATURES))
    return np.vstack(rows)


class FlightFeaturizer(TransformerMixin, BaseEstimator):
    """Stateless transformer from flight recordings to the 370-column matrix."""

    def fit(self, X, y=None):
        self.n_features_out_ = N_FEATURES
        return self

    def transform(self, X):
        return feature_matrix(X)

    def get_feature_names_out(self, input_features=None):
        return np.asarray(feature_names(), dtype=object)

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.requires_fit = False
        return tags


class Standardizer(TransformerMixin, BaseEstimator):
    """Zero-mean, unit-population-variance scaling fitted on training rows.

    Constant columns (max == min) keep ``scale_ = 1`` and are flagged in
    ``constant_``; they transform to zeros.
    """

    def fit(self, X, y=None):
        X = validate_data(self, X, dtype=np.float64)
        if X.shape[0] < 2:
            raise ValueError(f"need at least 2 training rows, got n_samples={X.shape[0]}")
        self.mean_ = X.mean(axis=0)
        self.constant_ = X.max(axis=0) == X.min(axis=0)
        scale = X.std(axis=0)
        scale[self.constant_] = 1.0
        self.mean_[self.constant_] = X[0, self.constant_]
        self.scale_ = scale
        return self

    def transform(self, X):
        check_is_fitted(self, "scale_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        return (X - self.mean_) / self.scale_


def fit_standardizer(features) -> Standardizer:
    return Standardizer().fit(features)


def apply_standardizer(std: Standardizer, features) -> np.ndarray:
    X = check_array(features, dtype=np.float64, ensure_2d=False)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != std.n_features_in_:
        raise ValueError(
            f"feature dimension mismatch: standardizer expects {std.n_features_in_}, got {X.shape[1]}")
    out = std.transform(X)
    return out[0] if single else out


def write_feature_csv(path, flight_ids, labels, X) -> None:
    X = np.asarray(X, dtype=np.float64)
    header = ["flight_id", "label"] + [f"f_{j:03d}" for j in range(X.shape[1])]
    lines = [",".join(header)]
    for fid, y, row in zip(flight_ids, labels, X):
        lines.append(f"{fid},{int(y)}," + ",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_feature_csv(path):
    """Inverse of :func:`write_feature_csv`: ``(flight_ids, labels, X)``."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    ids, labels, rows = [], [], []
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split(",")
        ids.append(parts[0])
        labels.append(int(parts[1]))
        rows.append([float(v) for v in parts[2:]])
    return ids, np.array(labels, dtype=np.int64), np.array(rows, dtype=np.float64)
