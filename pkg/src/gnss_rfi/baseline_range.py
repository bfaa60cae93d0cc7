"""Range-deviation detector: flag values outside the training envelope."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .recording import N_CHANNELS, FlightRecording


def _recordings(X):
    recs = list(X)
    if not recs:
        raise ValueError("need at least one flight recording")
    for r in recs:
        if not isinstance(r, FlightRecording):
            raise TypeError(f"expected FlightRecording, got {type(r).__name__}")
    return recs


class RangeDetector(ClassifierMixin, BaseEstimator):
    """Per-channel ``[min, max]`` envelope over every present training value.

    A point is anomalous iff it lies outside the closed envelope. A flight
    scores the fraction of its present ``(epoch, channel)`` pairs that are
    anomalous and is labeled 1 iff that fraction is positive.

    Parameters
    ----------
    normal_only : bool, default=False
        Build the envelope from label-0 training flights only.
    """

    def __init__(self, normal_only=False):
        self.normal_only = normal_only

    def fit(self, X, y=None):
        recs = _recordings(X)
        labels = np.array([r.label for r in recs]) if y is None else np.asarray(y)
        if self.normal_only:
            recs = [r for r, lab in zip(recs, labels) if lab == 0]
            if not recs:
                raise ValueError("normal_only=True but no label-0 training flights")
        low = np.full(N_CHANNELS, np.inf)
        high = np.full(N_CHANNELS, -np.inf)
        for r in recs:
            low = np.minimum(low, np.where(r.present, r.channels, np.inf).min(axis=0))
            high = np.maximum(high, np.where(r.present, r.channels, -np.inf).max(axis=0))
        self.known_ = np.isfinite(low) & np.isfinite(high)
        self.low_ = np.where(self.known_, low, np.nan)
        self.high_ = np.where(self.known_, high, np.nan)
        self.classes_ = np.array([0, 1])
        self.unknown_queries_ = 0
        return self

    def _violations(self, rec: FlightRecording) -> tuple[int, int]:
        known = self.known_[None, :] & rec.present
        x = rec.channels
        with np.errstate(invalid="ignore"):
            outside = known & ((x < self.low_[None, :]) | (x > self.high_[None, :]))
        return int(outside.sum()), int(rec.present.sum())

    def decision_function(self, X):
        """Out-of-envelope fraction per flight."""
        check_is_fitted(self, "known_")
        scores = []
        for rec in _recordings(X):
            bad, total = self._violations(rec)
            scores.append(bad / total if total else 0.0)
        return np.array(scores)

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(np.int64)

    def detect_point(self, value: float, channel: int) -> int:
        check_is_fitted(self, "known_")
        if not self.known_[channel]:
            self.unknown_queries_ += 1
            return 0
        return int(not (self.low_[channel] <= value <= self.high_[channel]))


def fit_range(dataset, normal_only: bool = False) -> RangeDetector:
    return RangeDetector(normal_only=normal_only).fit(list(dataset))


def detect_point(model: RangeDetector, value: float, channel: int) -> int:
    return model.detect_point(value, channel)


def detect_flight(model: RangeDetector, recording: FlightRecording) -> tuple[int, float]:
    score = float(model.decision_function([recording])[0])
    return int(score > 0), score
