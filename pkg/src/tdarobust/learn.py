"""Minimal linear models for the downstream tasks.

Primal subgradient training (Pegasos-style step sizes with the norm
projection) on the hinge loss for one-vs-rest classification and the
epsilon-insensitive loss for regression. Deterministic given
random_state; shuffling uses the package's counter-based streams.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin

from .errors import ParameterError
from .synth import make_rng
from .validation import check_fitted


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ParameterError("X must be a nonempty (n, d) matrix")
    if y.shape[0] != X.shape[0]:
        raise ParameterError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    return X, y


def _pegasos(X, signed, lam, epochs, rng, mode, epsilon=0.0):
    """Subgradient descent with iterate averaging.

    Returns the averaged iterate (w, b) and the objective of the
    running average after each epoch; the averaged trace is what decays
    smoothly enough to test monotonicity against.
    """
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    w_sum = np.zeros(d)
    b_sum = 0.0
    radius = 1.0 / np.sqrt(lam)
    t = int(np.ceil(1.0 / lam))  # warmup offset keeps the first steps near unit size
    averaged = 0
    trace = []
    for epoch in range(int(epochs)):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            x, y = X[i], signed[i]
            if mode == "hinge":
                violated = y * (w @ x + b) < 1.0
                w *= 1.0 - eta * lam
                if violated:
                    w += eta * y * x
                    b += eta * y
            else:  # epsilon-insensitive
                r = (w @ x + b) - y
                w *= 1.0 - eta * lam
                if abs(r) > epsilon:
                    s = np.sign(r)
                    w -= eta * s * x
                    b -= eta * s
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm
            w_sum += w
            b_sum += b
            averaged += 1
        if epoch == 0 and epochs > 1:
            # suffix averaging: drop the burn-in epoch from the average
            w_sum[:] = 0.0
            b_sum = 0.0
            averaged = 0
            w_avg, b_avg = w, b
        else:
            w_avg = w_sum / averaged
            b_avg = b_sum / averaged
        margins = X @ w_avg + b_avg
        if mode == "hinge":
            data_term = np.mean(np.maximum(0.0, 1.0 - signed * margins))
        else:
            data_term = np.mean(np.maximum(0.0, np.abs(margins - signed) - epsilon))
        trace.append(float(data_term + 0.5 * lam * (w_avg @ w_avg)))
    if averaged == 0:
        return w, b, trace
    return w_sum / averaged, b_sum / averaged, trace


class LinearSVMClassifier(BaseEstimator, ClassifierMixin):
    """One-vs-rest linear SVM trained by primal subgradient descent."""

    def __init__(self, lam=1e-3, epochs=200, random_state=0):
        self.lam = lam
        self.epochs = epochs
        self.random_state = random_state

    def fit(self, X, y):
        X, y = _check_xy(X, y)
        classes = np.unique(y)
        if classes.size < 2:
            raise ParameterError("classification needs at least 2 classes")
        lam = float(self.lam)
        if lam <= 0:
            raise ParameterError("lam must be positive")
        coef = np.zeros((classes.size, X.shape[1]))
        intercept = np.zeros(classes.size)
        traces = []
        for k, cls in enumerate(classes):
            signed = np.where(y == cls, 1.0, -1.0)
            rng = make_rng(self.random_state, stream=k)
            coef[k], intercept[k], trace = _pegasos(
                X, signed, lam, self.epochs, rng, mode="hinge")
            traces.append(trace)
        self.classes_ = classes
        self.coef_ = coef
        self.intercept_ = intercept
        self.objective_trace_ = np.mean(np.asarray(traces), axis=0)
        return self

    def decision_function(self, X):
        check_fitted(self, "coef_")
        X = np.asarray(X, dtype=float)
        return X @ self.coef_.T + self.intercept_

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]


class LinearSVMRegressor(BaseEstimator, RegressorMixin):
    """Linear support-vector regression (epsilon-insensitive loss)."""

    def __init__(self, lam=1e-3, epochs=200, epsilon=0.1, random_state=0):
        self.lam = lam
        self.epochs = epochs
        self.epsilon = epsilon
        self.random_state = random_state

    def fit(self, X, y):
        X, y = _check_xy(X, y)
        if X.shape[0] < 2:
            raise ParameterError("regression needs at least 2 samples")
        y = y.astype(float)
        lam = float(self.lam)
        if lam <= 0:
            raise ParameterError("lam must be positive")
        rng = make_rng(self.random_state, stream=0)
        self.coef_, self.intercept_, trace = _pegasos(
            X, y, lam, self.epochs, rng, mode="epsilon", epsilon=float(self.epsilon))
        self.objective_trace_ = np.asarray(trace)
        return self

    def predict(self, X):
        check_fitted(self, "coef_")
        X = np.asarray(X, dtype=float)
        return X @ self.coef_ + self.intercept_


def misclassification_rate(y_true, y_pred):
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0:
        raise ParameterError("empty evaluation set")
    return float(np.mean(y_true != y_pred))


def mean_squared_error(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.size == 0:
        raise ParameterError("empty evaluation set")
    return float(np.mean((y_true - y_pred) ** 2))
