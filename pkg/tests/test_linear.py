import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from gnss_rfi.features import Standardizer
from gnss_rfi.linear import (
    LinearModel,
    LogisticRegressionGD,
    loss_and_grad,
    predict_logistic,
    sigmoid,
    train_logistic,
)


def test_separable_1d_against_scipy():
    X = np.array([[-1.0], [1.0]])
    y = np.array([0, 1])
    model = train_logistic(X, y, l2=0.01)
    assert model.coef_[0] > 0
    assert (model.predict(X) == y).mean() == 1.0

    def objective(theta):
        loss, gw, gb = loss_and_grad(theta[:1], theta[1], X, y.astype(float), 0.01)
        return loss, np.append(gw, gb)

    ref = minimize(objective, np.zeros(2), jac=True, method="BFGS", options={"gtol": 1e-10})
    assert np.sign(ref.x[0]) == np.sign(model.coef_[0])
    assert model.coef_[0] == pytest.approx(ref.x[0], rel=1e-4)
    assert model.intercept_ == pytest.approx(ref.x[1], abs=1e-4)


def test_random_problem_matches_scipy():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(80, 6))
    y = (X @ rng.normal(size=6) + rng.normal(0, 1, 80) > 0).astype(float)
    model = LogisticRegressionGD(l2=0.05, tol=1e-9, max_iter=5000).fit(X, y)

    def objective(theta):
        loss, gw, gb = loss_and_grad(theta[:-1], theta[-1], X, y, 0.05)
        return loss, np.append(gw, gb)

    ref = minimize(objective, np.zeros(7), jac=True, method="BFGS", options={"gtol": 1e-11})
    np.testing.assert_allclose(model.coef_, ref.x[:-1], atol=1e-6)
    assert model.grad_norm_ <= 1e-9


def test_zero_weights_give_one_half():
    model = LinearModel(np.zeros(3), 0.0)
    p, label = predict_logistic(model, [5.0, -2.0, 1.0])
    assert p == 0.5 and label == 1


def test_single_class_is_degenerate():
    X = np.random.default_rng(0).normal(size=(10, 3))
    with pytest.warns(RuntimeWarning, match="single-class"):
        model = LogisticRegressionGD().fit(X, np.zeros(10))
    assert model.degenerate_
    np.testing.assert_array_equal(model.coef_, 0.0)
    assert model.intercept_ == -10.0
    assert (model.predict_proba(X)[:, 1] < 0.5).all()


def test_sigmoid_values():
    assert sigmoid(np.array([2.0]))[0] == pytest.approx(0.880797, abs=1e-6)
    with np.errstate(over="raise", invalid="raise", divide="raise"):
        lo = sigmoid(np.array([-1000.0, -700.0]))
        hi = sigmoid(np.array([1000.0, 700.0]))
    assert (lo >= 0).all() and lo[0] < 1e-300 and np.isfinite(lo).all()
    assert (hi == 1.0).all()


def test_threshold_tie_is_positive():
    model = LinearModel(np.array([1.0]), -1.0, threshold=0.5)
    assert predict_logistic(model, [1.0]) == (0.5, 1)


def test_dimension_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        predict_logistic(LinearModel(np.zeros(3), 0.0), [1.0, 2.0])
    model = LogisticRegressionGD().fit(np.array([[0.0, 1], [1, 0], [1, 1]]), [0, 1, 1])
    with pytest.raises(ValueError):
        model.predict(np.ones((2, 5)))


def test_loss_is_non_increasing():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(60, 8))
    y = (rng.random(60) < 0.3).astype(int)
    hist = np.array(LogisticRegressionGD(l2=1e-3, max_iter=300).fit(X, y).loss_history_)
    assert np.all(np.diff(hist) <= 0)


def test_deterministic():
    rng = np.random.default_rng(8)
    X, y = rng.normal(size=(40, 5)), rng.integers(0, 2, 40)
    a = LogisticRegressionGD().fit(X, y)
    b = LogisticRegressionGD().fit(X, y)
    assert a.coef_.tobytes() == b.coef_.tobytes() and a.intercept_ == b.intercept_


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), rows=st.integers(2, 50), cols=st.integers(1, 10),
       l2=st.floats(0.0, 1.0))
def test_gradient_matches_finite_differences(seed, rows, cols, l2):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(rows, cols))
    y = rng.integers(0, 2, rows).astype(float)
    w, b = rng.normal(size=cols), float(rng.normal())
    _, gw, gb = loss_and_grad(w, b, X, y, l2)
    h = 1e-5
    num = np.empty(cols + 1)
    for k in range(cols + 1):
        e = np.zeros(cols + 1)
        e[k] = h
        plus = loss_and_grad(w + e[:-1], b + e[-1], X, y, l2)[0]
        minus = loss_and_grad(w - e[:-1], b - e[-1], X, y, l2)[0]
        num[k] = (plus - minus) / (2 * h)
    ana = np.append(gw, gb)
    denom = np.maximum(np.abs(ana) + np.abs(num), 1e-8)
    assert (np.abs(ana - num) / denom).max() <= 1e-4 or np.abs(ana - num).max() <= 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31),
       scale=st.lists(st.floats(0.1, 100.0), min_size=4, max_size=4),
       sign=st.lists(st.sampled_from([-1.0, 1.0]), min_size=4, max_size=4),
       shift=st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=4))
def test_affine_rescaling_leaves_labels_unchanged(seed, scale, sign, shift):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 4))
    y = (X[:, 0] - X[:, 1] + rng.normal(0, 0.5, 40) > 0).astype(int)
    a = np.array(scale) * np.array(sign)
    X2 = X * a + np.array(shift)

    def fit_predict(data):
        std = Standardizer().fit(data)
        model = LogisticRegressionGD(max_iter=200).fit(std.transform(data), y)
        return model.decision_function(std.transform(data))

    s1, s2 = fit_predict(X), fit_predict(X2)
    clear = np.abs(s1) > 1e-6
    np.testing.assert_array_equal((s1 >= 0)[clear], (s2 >= 0)[clear])
