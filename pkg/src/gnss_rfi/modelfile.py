"""Versioned, checksummed JSON container for fitted detectors.

Layout::

    {"magic": "GNSS-RFI-MODEL", "format_version": "1.0", "kind": "gbdt",
     "checksum": "<sha256 of the canonical body>", "body": {...}}

The body carries the hyperparameters, training metadata, the standardizer
(linear, gbdt), the bin table (gbdt) and the model payload. Floats are
written with ``repr`` precision so a loaded model predicts identically.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np
from sklearn.pipeline import Pipeline

from .baseline_range import RangeDetector
from .features import FlightFeaturizer, Standardizer
from .gbdt import BinningTable, GBDTClassifier, Tree
from .linear import LogisticRegressionGD
from .pipeline import detector_kind

MAGIC = "GNSS-RFI-MODEL"
FORMAT_VERSION = "1.0"


class ModelFormatError(ValueError):
    pass


def _floats(values):
    return [None if not math.isfinite(v) else float(v) for v in np.asarray(values, dtype=np.float64)]


def _unfloats(values):
    return np.array([np.nan if v is None else v for v in values], dtype=np.float64)


def canonical(body: dict) -> bytes:
    return json.dumps(body, sort_keys=True, separators=(",", ":"), allow_nan=False).encode("utf-8")


def checksum(body: dict) -> str:
    return hashlib.sha256(canonical(body)).hexdigest()


def _standardizer_body(std: Standardizer) -> dict:
    return {"mean": _floats(std.mean_), "scale": _floats(std.scale_),
            "constant": [bool(c) for c in std.constant_]}


def _standardizer_from(d: dict) -> Standardizer:
    std = Standardizer()
    std.mean_ = _unfloats(d["mean"])
    std.scale_ = _unfloats(d["scale"])
    std.constant_ = np.array(d["constant"], dtype=bool)
    std.n_features_in_ = std.mean_.shape[0]
    return std


def model_body(model) -> dict:
    kind = detector_kind(model)
    if kind == "range":
        return {
            "hyper": model.get_params(),
            "training_meta": {"known_channels": int(model.known_.sum())},
            "payload": {"low": _floats(model.low_), "high": _floats(model.high_),
                        "known": [bool(k) for k in model.known_]},
        }
    clf = model[-1]
    body = {"hyper": clf.get_params(), "standardizer": _standardizer_body(model[-2])}
    if kind == "linear":
        body["training_meta"] = {"iterations": int(clf.n_iter_), "final_gradient_norm": clf.grad_norm_,
                                 "degenerate": bool(clf.degenerate_), "seed": None}
        body["payload"] = {"weights": _floats(clf.coef_), "bias": float(clf.intercept_)}
    else:
        body["training_meta"] = {"trees": len(clf.trees_), "degenerate": bool(clf.degenerate_),
                                 "train_loss": [float(v) for v in clf.train_loss_],
                                 "seed": clf.seed}
        body["bins"] = {"edges": [_floats(e) for e in clf.bins_.edges]}
        body["payload"] = {"base_score": float(clf.base_score_), "n_features": int(clf.n_features_in_),
                           "trees": [_tree_body(t) for t in clf.trees_]}
    return body


def _tree_body(tree: Tree) -> dict:
    d = tree.to_dict()
    d["threshold"] = _floats(tree.threshold)
    return d


def _tree_from(d: dict) -> Tree:
    d = dict(d)
    d["threshold"] = [np.nan if v is None else v for v in d["threshold"]]
    return Tree.from_dict(d)


def save_model(model, path) -> str:
    """Write ``model`` and return the body checksum."""
    body = model_body(model)
    digest = checksum(body)
    doc = {"magic": MAGIC, "format_version": FORMAT_VERSION, "kind": detector_kind(model),
           "checksum": digest, "body": body}
    text = json.dumps(doc, sort_keys=True, indent=1, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")
    return digest


def load_model(path):
    """Read a model file; raises :class:`ModelFormatError` on any inconsistency."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ModelFormatError(f"{path}: cannot read model file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not a model file ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("magic") != MAGIC:
        raise ModelFormatError(f"{path}: bad magic string")
    version = str(doc.get("format_version", ""))
    try:
        major = int(version.split(".")[0])
    except ValueError:
        raise ModelFormatError(f"{path}: unreadable format version {version!r}") from None
    if major > int(FORMAT_VERSION.split(".")[0]):
        raise ModelFormatError(
            f"{path}: format version {version} is newer than supported {FORMAT_VERSION}")
    body = doc.get("body")
    if not isinstance(body, dict) or checksum(body) != doc.get("checksum"):
        raise ModelFormatError(f"{path}: checksum mismatch; file is corrupt or was modified")
    kind = doc.get("kind")
    try:
        return _rebuild(kind, body)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: malformed {kind} payload: {exc}") from exc


def _rebuild(kind, body):
    payload = body["payload"]
    if kind == "range":
        det = RangeDetector(**body["hyper"])
        det.low_ = _unfloats(payload["low"])
        det.high_ = _unfloats(payload["high"])
        det.known_ = np.array(payload["known"], dtype=bool)
        det.classes_ = np.array([0, 1])
        det.unknown_queries_ = 0
        return det
    std = _standardizer_from(body["standardizer"])
    if kind == "linear":
        clf = LogisticRegressionGD(**body["hyper"])
        clf.coef_ = _unfloats(payload["weights"])
        clf.intercept_ = float(payload["bias"])
        meta = body["training_meta"]
        clf.n_iter_ = meta["iterations"]
        clf.grad_norm_ = meta["final_gradient_norm"]
        clf.degenerate_ = meta["degenerate"]
        clf.loss_history_ = []
        clf.n_features_in_ = clf.coef_.shape[0]
    elif kind == "gbdt":
        clf = GBDTClassifier(**body["hyper"])
        clf.bins_ = BinningTable([_unfloats(e) for e in body["bins"]["edges"]])
        clf.base_score_ = float(payload["base_score"])
        clf.trees_ = [_tree_from(t) for t in payload["trees"]]
        clf.n_features_in_ = int(payload["n_features"])
        clf.degenerate_ = body["training_meta"]["degenerate"]
        clf.train_loss_ = list(body["training_meta"]["train_loss"])
    else:
        raise ModelFormatError(f"unknown model kind {kind!r}")
    clf.classes_ = np.array([0, 1])
    featurizer = FlightFeaturizer().fit(None)
    return Pipeline([("features", featurizer), ("scale", std), ("model", clf)])
