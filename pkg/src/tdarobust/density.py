"""Filter-function estimators: KDE, robust KDE (KIRWLS), DTM, KDist.

All estimators follow the sklearn fit/evaluate convention: parameters in
__init__, data only in fit(), fitted state in trailing-underscore
attributes. `eval_on_grid` samples any fitted estimator into a
ScalarField carrying the estimator's filtration direction.
"""

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator

from .errors import DegenerateWeightsError, ParameterError
from .grids import SUBLEVEL, SUPERLEVEL, ScalarField
from .kernels import GaussianKernel, KernelExpansion
from .losses import HuberLoss, SquaredLoss, HampelLoss
from .validation import as_points, check_fitted, check_in_range, check_positive


def bandwidth_knn(X, k):
    """Median over i of the distance from X_i to its k-th nearest neighbor.

    Even-count medians take the lower-middle order statistic so the
    result is always an observed distance (deterministic).
    """
    X = as_points(X)
    n = X.shape[0]
    k = int(k)
    if n < 2:
        raise ParameterError("bandwidth_knn needs at least 2 points")
    if not 1 <= k <= n - 1:
        raise ParameterError(f"k must lie in [1, {n - 1}], got {k}")
    dists = cdist(X, X)
    kth = np.sort(dists, axis=1)[:, k]  # column 0 is the self-distance
    kth.sort()
    return float(kth[(n - 1) // 2])


class KernelDensityEstimator(BaseEstimator):
    """Plain KDE: uniform-weight kernel expansion over the sample."""

    direction = SUPERLEVEL
    nonneg = True

    def __init__(self, sigma=1.0):
        self.sigma = sigma

    def fit(self, X, y=None):
        X = as_points(X)
        kernel = GaussianKernel(self.sigma, X.shape[1])
        weights = np.full(X.shape[0], 1.0 / X.shape[0])
        self.expansion_ = KernelExpansion(kernel, X, weights)
        self.kernel_ = kernel
        return self

    def evaluate(self, points):
        check_fitted(self, "expansion_")
        return self.expansion_.evaluate(points)


class RobustKernelDensityEstimator(BaseEstimator):
    """Robust KDE: M-estimated mean embedding fitted by KIRWLS.

    Parameters
    ----------
    sigma : float
        Kernel bandwidth.
    loss : RobustLoss or None
        Robust loss; defaults to Huber. With the squared loss the fit
        returns immediately with uniform weights (the KDE).
    max_iter : int
        Cap on reweighting sweeps.
    tol : float
        Relative change of the empirical risk that stops the iteration.

    Attributes
    ----------
    expansion_ : KernelExpansion with the converged weights.
    weights_ : the inlyingness weights (nonnegative, sum to one).
    n_iter_ : number of sweeps performed.
    risk_trace_ : empirical risk after each sweep; nonincreasing
        whenever phi is nonincreasing.
    converged_ : whether the tolerance was met before max_iter.
    """

    direction = SUPERLEVEL
    nonneg = True

    def __init__(self, sigma=1.0, loss=None, max_iter=200, tol=1e-9):
        self.sigma = sigma
        self.loss = loss
        self.max_iter = max_iter
        self.tol = tol

    def _resolved_loss(self):
        return HuberLoss() if self.loss is None else self.loss

    def fit(self, X, y=None):
        X = as_points(X)
        n = X.shape[0]
        loss = self._resolved_loss()
        max_iter = int(self.max_iter)
        tol = check_positive(self.tol, "tol")
        if max_iter < 1:
            raise ParameterError(f"max_iter must be >= 1, got {self.max_iter}")

        kernel = GaussianKernel(self.sigma, X.shape[1])
        kappa = kernel.kappa
        gram = kernel.gram(X)
        w = np.full(n, 1.0 / n)

        if isinstance(loss, SquaredLoss):
            # closed-form case: the unique minimizer is the KDE
            self._finish(kernel, X, w, gram, iters=0, trace=[], converged=True)
            risk = self._risk(loss, gram, w, kappa)[0]
            self.risk_trace_ = [risk]
            return self

        trace = []
        converged = False
        iters = 0
        for it in range(1, max_iter + 1):
            iters = it
            risk, residuals = self._risk(loss, gram, w, kappa)
            trace.append(risk)
            raw = loss.phi(residuals)
            total = float(raw.sum())
            if not np.isfinite(total) or total <= 0.0:
                raise DegenerateWeightsError(
                    "all reweighting factors vanished; every point lies past "
                    "the loss cutoff (try larger hampel knots or another loss)"
                )
            w = raw / total
            if it >= 2 and abs(trace[-1] - trace[-2]) <= tol * max(abs(trace[-2]), 1e-300):
                converged = True
                break

        self._finish(kernel, X, w, gram, iters=iters, trace=trace, converged=converged)
        return self

    @staticmethod
    def _risk(loss, gram, w, kappa):
        gw = gram @ w
        quad = float(w @ gw)
        residuals = np.sqrt(np.clip(kappa - 2.0 * gw + quad, 0.0, None))
        return float(np.mean(loss.rho(residuals))), residuals

    def _finish(self, kernel, X, w, gram, iters, trace, converged):
        self.kernel_ = kernel
        self.expansion_ = KernelExpansion(kernel, X, w, gram=gram)
        self.weights_ = w
        self.n_iter_ = iters
        self.risk_trace_ = trace
        self.converged_ = converged

    def evaluate(self, points):
        check_fitted(self, "expansion_")
        return self.expansion_.evaluate(points)


class DistanceToMeasure(BaseEstimator):
    """Empirical distance-to-measure with mass parameter m in (0, 1].

    d(x) = sqrt(mean of the k smallest squared distances from x to the
    sample), k = ceil(m * n). Distance-like: small near the data, so
    persistence uses the sublevel filtration.
    """

    direction = SUBLEVEL
    nonneg = True

    def __init__(self, m=0.05):
        self.m = m

    def fit(self, X, y=None):
        X = as_points(X)
        m = check_in_range(self.m, "m", 0.0, 1.0, closed_hi=True)
        self.X_ = X
        self.k_ = int(np.ceil(m * X.shape[0]))
        if not 1 <= self.k_ <= X.shape[0]:
            raise ParameterError(f"derived k={self.k_} is out of range")
        return self

    def evaluate(self, points):
        check_fitted(self, "X_")
        points = as_points(points, dim=self.X_.shape[1], name="points")
        k = self.k_
        out = np.empty(points.shape[0])
        # brute-force exact k smallest squared distances, chunked
        chunk = max(1, int(2**22 / max(self.X_.shape[0], 1)))
        for start in range(0, points.shape[0], chunk):
            block = points[start:start + chunk]
            sq = cdist(block, self.X_, "sqeuclidean")
            if k < self.X_.shape[0]:
                part = np.partition(sq, k - 1, axis=1)[:, :k]
            else:
                part = sq
            out[start:start + chunk] = np.sqrt(part.mean(axis=1))
        return out


class KernelDistance(BaseEstimator):
    """Kernel distance |Phi(x) - mean embedding|_H of the sample.

    Its sublevel sets are monotone reparametrizations of the KDE
    superlevel sets.
    """

    direction = SUBLEVEL
    nonneg = True

    def __init__(self, sigma=1.0):
        self.sigma = sigma

    def fit(self, X, y=None):
        X = as_points(X)
        kernel = GaussianKernel(self.sigma, X.shape[1])
        weights = np.full(X.shape[0], 1.0 / X.shape[0])
        self.expansion_ = KernelExpansion(kernel, X, weights)
        self.kernel_ = kernel
        return self

    def evaluate(self, points):
        check_fitted(self, "expansion_")
        return self.expansion_.residual_norms(points)


def eval_on_grid(estimator, grid):
    """Sample a fitted estimator at every grid vertex into a ScalarField."""
    values = estimator.evaluate(grid.vertices())
    return ScalarField(grid, values, direction=estimator.direction,
                       nonneg=getattr(estimator, "nonneg", None))


def hampel_from_residuals(X, sigma, quantiles=(0.5, 0.75, 0.95)):
    """Hampel knots from quantiles of the KDE residual norms on X.

    Data-driven knot placement in the spirit of the original robust-KDE
    experiments: points whose residual exceeds the top quantile are cut
    off entirely.
    """
    X = as_points(X)
    q1, q2, q3 = quantiles
    if not 0.0 < q1 < q2 < q3 <= 1.0:
        raise ParameterError(f"quantiles must increase within (0, 1], got {quantiles}")
    kernel = GaussianKernel(sigma, X.shape[1])
    expansion = KernelExpansion(kernel, X, np.full(X.shape[0], 1.0 / X.shape[0]))
    residuals = expansion.residual_norms(X)
    a, b, c = np.quantile(residuals, [q1, q2, q3], method="lower")
    if not 0.0 < a < b < c:
        # fall back to spreading the knots around the median residual
        med = max(float(np.median(residuals)), 1e-12)
        a, b, c = med, 2.0 * med, 3.0 * med
    return HampelLoss(float(a), float(b), float(c))
