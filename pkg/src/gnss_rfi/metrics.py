"""Flight-level evaluation metrics."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np


def _binary_labels(labels) -> np.ndarray:
    y = np.asarray(labels).reshape(-1)
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    return y.astype(np.int64)


def _midranks(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="mergesort")
    sorted_x = x[order]
    starts = np.flatnonzero(np.r_[True, sorted_x[1:] != sorted_x[:-1]])
    ends = np.r_[starts[1:], x.shape[0]]
    # 1-based average rank of each tie group, exact in binary floating point
    group_rank = (starts + 1 + ends) / 2.0
    ranks = np.empty(x.shape[0])
    ranks[order] = np.repeat(group_rank, ends - starts)
    return ranks


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) with ties worth one half."""
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = _binary_labels(labels)
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    if np.any(np.isnan(s)):
        raise ValueError("scores contain NaN")
    n_pos = int(y.sum())
    n_neg = y.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC AUC needs both classes present")
    rank_sum = _midranks(s)[y == 1].sum()
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_predictions(cls, labels, predictions) -> "ConfusionCounts":
        y = _binary_labels(labels)
        p = _binary_labels(predictions)
        return cls(
            tp=int(np.sum((p == 1) & (y == 1))),
            fp=int(np.sum((p == 1) & (y == 0))),
            tn=int(np.sum((p == 0) & (y == 0))),
            fn=int(np.sum((p == 0) & (y == 1))),
        )


def classification_metrics(counts: ConfusionCounts) -> tuple[float, float, float, float]:
    """Precision, recall, F1 and accuracy; zero where a denominator vanishes."""
    if counts.total <= 0:
        raise ValueError("no evaluated instances")
    tp, fp, tn, fn = counts.tp, counts.fp, counts.tn, counts.fn
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    accuracy = (tp + tn) / counts.total
    return precision, recall, f1, accuracy


@dataclass(frozen=True)
class EvaluationReport:
    roc_auc: float
    precision: float
    recall: float
    f1: float
    accuracy: float
    counts: ConfusionCounts
    n_flights: int
    prevalence: float
    threshold: float
    seconds_per_flight: float = float("nan")

    COLUMNS = ("roc_auc", "precision", "recall", "f1", "accuracy")

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update(d.pop("counts"))
        return d

    def to_text(self) -> str:
        head = ["ROC AUC", "Precision", "Recall", "F1 Score", "Accuracy"]
        vals = [f"{getattr(self, c):.4f}" for c in self.COLUMNS]
        widths = [max(len(h), len(v)) for h, v in zip(head, vals)]
        lines = [
            "  ".join(h.rjust(w) for h, w in zip(head, widths)),
            "  ".join(v.rjust(w) for v, w in zip(vals, widths)),
            f"flights={self.n_flights} prevalence={self.prevalence:.4f} threshold={self.threshold:g} "
            f"tp={self.counts.tp} fp={self.counts.fp} tn={self.counts.tn} fn={self.counts.fn}",
            f"mean inference time per flight: {self.seconds_per_flight:.4g} s",
        ]
        return "\n".join(lines)

    def write(self, path) -> None:
        lines = [f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}" for k, v in self.as_dict().items()]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_report(path) -> dict:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        key, _, value = line.partition("=")
        out[key] = float(value) if any(ch in value for ch in ".en") else int(value)
    return out


def build_report(scores, predictions, labels, threshold, seconds_per_flight=float("nan")) -> EvaluationReport:
    y = _binary_labels(labels)
    counts = ConfusionCounts.from_predictions(y, predictions)
    precision, recall, f1, accuracy = classification_metrics(counts)
    try:
        auc = roc_auc(scores, y)
    except ValueError:
        if 0 < y.sum() < y.shape[0]:
            raise
        auc = float("nan")
    return EvaluationReport(auc, precision, recall, f1, accuracy, counts, int(y.shape[0]),
                            float(y.mean()), float(threshold), float(seconds_per_flight))


def score_flights(model, recordings) -> tuple[np.ndarray, np.ndarray]:
    """Continuous scores and hard labels from any fitted detector."""
    if hasattr(model, "predict_proba"):
        scores = model.predict_proba(recordings)[:, 1]
    else:
        scores = model.decision_function(recordings)
    return np.asarray(scores, dtype=np.float64), np.asarray(model.predict(recordings))


def model_threshold(model) -> float:
    final = model[-1] if hasattr(model, "steps") else model
    return float(getattr(final, "threshold", 0.0))


def evaluate(model, dataset) -> EvaluationReport:
    """Score every flight with a fitted detector and summarize.

    ``model`` is a fitted flight-level estimator (a :class:`RangeDetector` or a
    featurize/scale/classify pipeline); nothing is refitted here.
    """
    recs = list(dataset)
    if not recs:
        raise ValueError("empty evaluation set")
    labels = np.array([r.label for r in recs])
    t0 = time.perf_counter()
    scores, predictions = [], []
    for r in recs:
        try:
            s, p = score_flights(model, [r])
        except Exception as exc:
            raise RuntimeError(f"scoring failed for flight {r.flight_id}: {exc}") from exc
        scores.append(s[0])
        predictions.append(p[0])
    elapsed = (time.perf_counter() - t0) / len(recs)
    return build_report(np.array(scores), np.array(predictions), labels, model_threshold(model), elapsed)
