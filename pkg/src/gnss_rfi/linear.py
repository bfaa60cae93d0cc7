"""L2-regularized logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted, validate_data

LOGIT_CLIP = 10.0


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logit(p: float) -> float:
    p = float(np.clip(p, 1e-300, 1.0))
    if p >= 1.0:
        return LOGIT_CLIP
    return float(np.clip(np.log(p) - np.log1p(-p), -LOGIT_CLIP, LOGIT_CLIP))


def loss_and_grad(w, b, X, y, l2):
    """Mean cross-entropy plus ``l2/2 * ||w||^2``; bias is not penalized."""
    z = X @ w + b
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * np.dot(w, w)
    r = sigmoid(z) - y
    n = X.shape[0]
    return loss, X.T @ r / n + l2 * w, r.sum() / n


class LogisticRegressionGD(ClassifierMixin, BaseEstimator):
    """Binary logistic regression with a deterministic solver.

    Weights start at zero. Each step follows the negative gradient with an
    Armijo backtracking line search, so the training loss never increases.
    Stops when the gradient infinity-norm drops to ``tol`` or after
    ``max_iter`` steps. Predicts 1 when the probability is ``>= threshold``.

    A training set with a single class yields zero weights and a bias equal
    to the clipped log-odds of the prevalence; ``degenerate_`` is set.
    """

    def __init__(self, l2=1e-3, max_iter=1000, tol=1e-6, threshold=0.5):
        self.l2 = l2
        self.max_iter = max_iter
        self.tol = tol
        self.threshold = threshold

    def fit(self, X, y):
        X, y = validate_data(self, X, y, dtype=np.float64)
        y = np.asarray(y)
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0 or 1")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be in (0, 1)")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")
        if X.shape[0] < 2:
            raise ValueError(f"need at least 2 training rows, got n_samples={X.shape[0]}")
        y = y.astype(np.float64)
        self.classes_ = np.array([0, 1])
        n_features = X.shape[1]
        w = np.zeros(n_features)
        b = 0.0

        if np.all(y == y[0]):
            warnings.warn("single-class training set; fitting a constant model", RuntimeWarning)
            self.coef_ = w
            self.intercept_ = logit(y.mean())
            self.degenerate_ = True
            self.n_iter_ = 0
            self.grad_norm_ = 0.0
            self.loss_history_ = []
            return self

        loss, gw, gb = loss_and_grad(w, b, X, y, self.l2)
        history = [loss]
        step = 1.0
        n_iter = 0
        gnorm = max(np.abs(gw).max(initial=0.0), abs(gb))
        while gnorm > self.tol and n_iter < self.max_iter:
            sq = np.dot(gw, gw) + gb * gb
            step = min(step * 2.0, 1e6)
            while True:
                w_new = w - step * gw
                b_new = b - step * gb
                new_loss, new_gw, new_gb = loss_and_grad(w_new, b_new, X, y, self.l2)
                if new_loss <= loss - 1e-4 * step * sq:
                    break
                step *= 0.5
                if step < 1e-20:
                    break
            if new_loss > loss:
                break
            w, b, loss, gw, gb = w_new, b_new, new_loss, new_gw, new_gb
            history.append(loss)
            n_iter += 1
            gnorm = max(np.abs(gw).max(initial=0.0), abs(gb))

        self.coef_ = w
        self.intercept_ = float(b)
        self.degenerate_ = False
        self.n_iter_ = n_iter
        self.grad_norm_ = float(gnorm)
        self.loss_history_ = history
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        p = sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= self.threshold).astype(np.int64)


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    threshold: float = 0.5


def train_logistic(features, labels, l2=1e-3, max_iters=1000, tol=1e-6) -> LogisticRegressionGD:
    return LogisticRegressionGD(l2=l2, max_iter=max_iters, tol=tol).fit(features, labels)


def predict_logistic(model, features) -> tuple[float, int]:
    """Probability and label for one standardized feature vector."""
    if isinstance(model, LinearModel):
        w, b, thr = np.asarray(model.weights), model.bias, model.threshold
    else:
        check_is_fitted(model, "coef_")
        w, b, thr = model.coef_, model.intercept_, model.threshold
    x = np.asarray(features, dtype=np.float64).reshape(-1)
    if x.shape[0] != w.shape[0]:
        raise ValueError(f"feature dimension mismatch: model expects {w.shape[0]}, got {x.shape[0]}")
    p = float(sigmoid(np.array([np.dot(w, x) + b]))[0])
    return p, int(p >= thr)
