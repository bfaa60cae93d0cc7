"""Histogram-based gradient-boosted trees with leaf-wise growth.

Binary logistic loss with second-order leaf values. Splits are searched
over quantile bin boundaries; a split on ``(feature, bin)`` sends rows with
``bin <= b`` (equivalently ``x <= edges[feature][b]``) to the left child.
Ties in gain resolve to the lowest feature index, then the lowest bin.
No row or column subsampling is done, so training is fully deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, validate_data

from .linear import logit, sigmoid

MAX_BINS = 255


@dataclass
class BinningTable:
    """Per-feature strictly increasing bin upper edges.

    ``edges[j]`` holds ``n_bins[j] - 1`` interior edges; the last bin is
    open-ended. ``bin(x) = #{edges < x}``.
    """

    edges: list = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return len(self.edges)

    @property
    def n_bins(self) -> np.ndarray:
        return np.array([len(e) + 1 for e in self.edges], dtype=np.int64)

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        out = np.empty(X.shape, dtype=np.uint8)
        for j, e in enumerate(self.edges):
            out[:, j] = np.searchsorted(e, X[:, j], side="left")
        return out


def _column_edges(col: np.ndarray, max_bins: int) -> np.ndarray:
    values = np.sort(col)
    distinct = np.unique(values)
    if distinct.shape[0] <= max_bins:
        return distinct[:-1].copy()
    n = values.shape[0]
    # cut after rank floor(k*n/max_bins + 1/2); the edge is the largest value below the cut
    cuts = np.floor(np.arange(1, max_bins) * n / max_bins + 0.5).astype(np.int64)
    cuts = cuts[(cuts > 0) & (cuts < n)]
    edges = np.unique(values[cuts - 1])
    return edges[edges < values[-1]]


def fit_bins(features, max_bins: int = MAX_BINS) -> BinningTable:
    X = check_array(features, dtype=np.float64, ensure_all_finite=True)
    if X.shape[0] < 2:
        raise ValueError(f"need at least 2 rows to fit bins, got n_samples={X.shape[0]}")
    if not 2 <= max_bins <= MAX_BINS:
        raise ValueError(f"max_bins must be in [2, {MAX_BINS}]")
    return BinningTable([_column_edges(X[:, j], max_bins) for j in range(X.shape[1])])


@dataclass
class SplitCandidate:
    gain: float
    feature: int
    bin: int
    n_left: int
    n_right: int


def split_gain(g_left, h_left, g_right, h_right, l2):
    g, h = g_left + g_right, h_left + h_right
    return 0.5 * (g_left ** 2 / (h_left + l2) + g_right ** 2 / (h_right + l2) - g ** 2 / (h + l2))


def build_histograms(binned_rows: np.ndarray, g: np.ndarray, h: np.ndarray, n_slots: int):
    """Gradient, hessian and count sums per (feature, bin); shape ``(F, n_slots)``."""
    n, n_features = binned_rows.shape
    idx = (binned_rows.astype(np.int64) + np.arange(n_features) * n_slots).ravel()
    size = n_features * n_slots
    hg = np.bincount(idx, weights=np.repeat(g, n_features), minlength=size)
    hh = np.bincount(idx, weights=np.repeat(h, n_features), minlength=size)
    hc = np.bincount(idx, minlength=size)
    shape = (n_features, n_slots)
    return hg.reshape(shape), hh.reshape(shape), hc.reshape(shape)


def best_split(hist, g_total, h_total, n_total, n_bins, l2, min_samples_leaf):
    """Maximal-gain ``(feature, bin)`` from histograms, or None if nothing is admissible."""
    hg, hh, hc = hist
    gl = np.cumsum(hg, axis=1)[:, :-1]
    hl = np.cumsum(hh, axis=1)[:, :-1]
    cl = np.cumsum(hc, axis=1)[:, :-1]
    gr = g_total - gl
    hr = h_total - hl
    cr = n_total - cl
    gain = split_gain(gl, hl, gr, hr, l2)
    valid = (cl >= min_samples_leaf) & (cr >= min_samples_leaf)
    valid &= np.arange(gl.shape[1])[None, :] < (n_bins[:, None] - 1)
    gain = np.where(valid, gain, -np.inf)
    flat = int(np.argmax(gain))
    f, b = divmod(flat, gain.shape[1])
    best = gain[f, b]
    if not np.isfinite(best) or best <= 0.0:
        return None
    return SplitCandidate(float(best), int(f), int(b), int(cl[f, b]), int(cr[f, b]))


@dataclass
class Tree:
    """Flat binary tree. Leaves have ``feature == -1``."""

    feature: np.ndarray
    bin: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    default_left: np.ndarray
    value: np.ndarray
    gain: np.ndarray

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row; NaN follows the default direction."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] >= 0)
        while active.size:
            cur = node[active]
            f = self.feature[cur]
            x = X[active, f]
            go_left = np.where(np.isnan(x), self.default_left[cur], x <= self.threshold[cur])
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] >= 0]
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "bin": self.bin.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "default_left": [bool(v) for v in self.default_left],
            "value": self.value.tolist(),
            "gain": self.gain.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            feature=np.array(d["feature"], dtype=np.int64),
            bin=np.array(d["bin"], dtype=np.int64),
            threshold=np.array(d["threshold"], dtype=np.float64),
            left=np.array(d["left"], dtype=np.int64),
            right=np.array(d["right"], dtype=np.int64),
            default_left=np.array(d["default_left"], dtype=bool),
            value=np.array(d["value"], dtype=np.float64),
            gain=np.array(d["gain"], dtype=np.float64),
        )


class _Node:
    __slots__ = ("rows", "hist", "g", "h", "split", "feature", "bin", "left", "right",
                 "default_left", "value", "gain")

    def __init__(self, rows, hist, g, h):
        self.rows = rows
        self.hist = hist
        self.g = g
        self.h = h
        self.split = None
        self.feature = -1
        self.bin = -1
        self.left = -1
        self.right = -1
        self.default_left = True
        self.value = 0.0
        self.gain = 0.0


def grow_tree(binned, grad, hess, edges, n_bins, max_leaves, min_samples_leaf, l2,
              learning_rate, split_log=None):
    """Grow one tree leaf-wise; returns the tree and each leaf's row set."""
    n_slots = int(n_bins.max())

    def make(rows, hist=None):
        g = grad[rows].sum()
        h = hess[rows].sum()
        if hist is None:
            hist = build_histograms(binned[rows], grad[rows], hess[rows], n_slots)
        node = _Node(rows, hist, g, h)
        node.split = best_split(hist, g, h, rows.shape[0], n_bins, l2, min_samples_leaf)
        return node

    nodes = [make(np.arange(binned.shape[0]))]
    leaves = [0]
    while len(leaves) < max_leaves:
        candidates = [i for i in leaves if nodes[i].split is not None]
        if not candidates:
            break
        # max gain, earliest-created leaf on ties
        target = max(candidates, key=lambda i: (nodes[i].split.gain, -i))
        parent = nodes[target]
        s = parent.split
        if split_log is not None:
            split_log.append((parent.rows.copy(), s))
        mask = binned[parent.rows, s.feature] <= s.bin
        left_rows, right_rows = parent.rows[mask], parent.rows[~mask]
        if left_rows.shape[0] <= right_rows.shape[0]:
            small = make(left_rows)
            big_hist = tuple(p - c for p, c in zip(parent.hist, small.hist))
            left, right = small, make(right_rows, big_hist)
        else:
            small = make(right_rows)
            big_hist = tuple(p - c for p, c in zip(parent.hist, small.hist))
            left, right = make(left_rows, big_hist), small
        parent.feature, parent.bin, parent.gain = s.feature, s.bin, s.gain
        parent.default_left = s.n_left >= s.n_right
        parent.left, parent.right = len(nodes), len(nodes) + 1
        nodes.extend([left, right])
        leaves.remove(target)
        leaves.extend([parent.left, parent.right])
        parent.hist = None

    for i in leaves:
        nd = nodes[i]
        nd.value = -nd.g / (nd.h + l2) * learning_rate
        nd.hist = None

    tree = Tree(
        feature=np.array([nd.feature for nd in nodes], dtype=np.int64),
        bin=np.array([nd.bin for nd in nodes], dtype=np.int64),
        threshold=np.array([edges[nd.feature][nd.bin] if nd.feature >= 0 else np.nan
                            for nd in nodes], dtype=np.float64),
        left=np.array([nd.left for nd in nodes], dtype=np.int64),
        right=np.array([nd.right for nd in nodes], dtype=np.int64),
        default_left=np.array([nd.default_left for nd in nodes], dtype=bool),
        value=np.array([nd.value for nd in nodes], dtype=np.float64),
        gain=np.array([nd.gain for nd in nodes], dtype=np.float64),
    )
    return tree, {i: nodes[i].rows for i in leaves}


def logistic_loss(raw, y) -> float:
    return float(np.mean(np.logaddexp(0.0, raw) - y * raw))


class GBDTClassifier(ClassifierMixin, BaseEstimator):
    """Gradient-boosted trees for binary labels.

    Parameters
    ----------
    n_trees : int, default=100
    learning_rate : float, default=0.1
    max_leaves : int, default=31
    min_samples_leaf : int, default=20
    l2_leaf : float, default=1.0
        Ridge term added to hessian sums in gains and leaf values.
    max_bins : int, default=255
    seed : int, default=0
        Recorded for provenance only; training draws no random numbers.
    threshold : float, default=0.5
    """

    def __init__(self, n_trees=100, learning_rate=0.1, max_leaves=31, min_samples_leaf=20,
                 l2_leaf=1.0, max_bins=MAX_BINS, seed=0, threshold=0.5):
        self.n_trees = n_trees
        self.learning_rate = learning_rate
        self.max_leaves = max_leaves
        self.min_samples_leaf = min_samples_leaf
        self.l2_leaf = l2_leaf
        self.max_bins = max_bins
        self.seed = seed
        self.threshold = threshold

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.input_tags.allow_nan = True  # prediction only; NaN follows the default direction
        return tags

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=np.float64)
        y = np.asarray(y)
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 or 1")
        if self.max_leaves < 2 or self.min_samples_leaf < 1 or self.n_trees < 0:
            raise ValueError("invalid tree hyperparameters")
        y = y.astype(np.float64)
        self.classes_ = np.array([0, 1])
        self.bins_ = fit_bins(X, self.max_bins)
        self.trees_ = []
        self.train_loss_ = []
        self.degenerate_ = bool(np.all(y == y[0]))
        prevalence = float(y.mean())
        if self.degenerate_:
            self.base_score_ = logit(prevalence)
            return self
        self.base_score_ = math.log(prevalence) - math.log1p(-prevalence)

        binned = self.bins_.transform(X)
        n_bins = self.bins_.n_bins
        raw = np.full(X.shape[0], self.base_score_)
        self.train_loss_.append(logistic_loss(raw, y))
        for _ in range(self.n_trees):
            p = sigmoid(raw)
            grad = p - y
            hess = p * (1.0 - p)
            tree, leaf_rows = grow_tree(binned, grad, hess, self.bins_.edges, n_bins,
                                        self.max_leaves, self.min_samples_leaf, self.l2_leaf,
                                        self.learning_rate)
            for leaf, rows in leaf_rows.items():
                raw[rows] += tree.value[leaf]
            self.trees_.append(tree)
            self.train_loss_.append(logistic_loss(raw, y))
        return self

    def decision_function(self, X):
        check_is_fitted(self, "trees_")
        X = validate_data(self, X, dtype=np.float64, reset=False, ensure_all_finite="allow-nan")
        raw = np.full(X.shape[0], self.base_score_)
        for tree in self.trees_:
            raw += tree.predict(X)
        return raw

    def predict_proba(self, X):
        p = sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= self.threshold).astype(np.int64)


def train_gbdt(features, labels, **hyper) -> GBDTClassifier:
    return GBDTClassifier(**hyper).fit(features, labels)


def predict_gbdt(model: GBDTClassifier, features) -> tuple[float, int]:
    x = np.asarray(features, dtype=np.float64).reshape(1, -1)
    if x.shape[1] != model.n_features_in_:
        raise ValueError(
            f"feature dimension mismatch: model expects {model.n_features_in_}, got {x.shape[1]}")
    p = float(model.predict_proba(x)[0, 1])
    return p, int(p >= model.threshold)
