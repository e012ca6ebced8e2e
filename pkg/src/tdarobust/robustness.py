"""Influence diagnostics and confidence-band radii for robust diagrams.

Empirical influence compares the diagrams (and the sup gap) of an
estimator fitted with and without a contamination set. The theoretical
bounds replace population integrals by empirical means over the sample,
which is how they are evaluated in practice.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import clone

from .density import RobustKernelDensityEstimator, eval_on_grid
from .diagrams import bottleneck, wasserstein
from .errors import ParameterError
from .homology import persistence
from .kernels import GaussianKernel, KernelExpansion
from .validation import as_points, check_in_range, check_positive

GAMMA_FLOOR = 12.0 / np.sqrt(np.log(2.0))


@dataclass
class InfluenceResult:
    value: float      # diagram-metric influence
    sup_gap: float    # companion L-inf influence of the same fields


def empirical_influence(X, Y, estimator, grid, dim=1, metric="bottleneck", p=1.0):
    """Diagram-metric influence of adding the points Y to the sample X.

    Fits (clones of) the estimator on X and on X u Y, evaluates both on
    the grid, and returns the chosen metric between the two diagrams at
    the requested dimension together with the sup-grid gap of the
    fields themselves.
    """
    X = as_points(X)
    if Y is None or np.size(Y) == 0:
        XY = X
    else:
        Y = as_points(Y, dim=X.shape[1], name="Y")
        XY = np.vstack([X, Y])
    if not grid.contains(XY):
        raise ParameterError("grid must cover X and Y")

    base = clone(estimator).fit(X)
    contaminated = clone(estimator).fit(XY)
    f0 = eval_on_grid(base, grid)
    f1 = eval_on_grid(contaminated, grid)
    d0 = persistence(f0, max_dim=dim)[dim]
    d1 = persistence(f1, max_dim=dim)[dim]
    if metric == "bottleneck":
        value = bottleneck(d0, d1)
    elif metric == "wasserstein":
        value = wasserstein(d0, d1, p=p)
    else:
        raise ParameterError(f"unknown metric {metric!r}")
    return InfluenceResult(value=float(value), sup_gap=f0.sup_diff(f1))


def _fit_rkde(X, kernel, loss, fitted=None):
    if fitted is not None:
        return fitted
    est = RobustKernelDensityEstimator(sigma=kernel.sigma, loss=loss)
    return est.fit(X)


def influence_bound_rkde(X, sigma, loss, points, fitted=None):
    """Theoretical persistence-influence bound for the robust KDE.

    nu * rho'(|Phi(x) - f|_H) / mean_i zeta(|Phi(X_i) - f|_H), with the
    population integral replaced by the empirical mean over X.
    """
    X = as_points(X)
    kernel = GaussianKernel(sigma, X.shape[1])
    est = _fit_rkde(X, kernel, loss, fitted)
    expansion = est.expansion_
    sample_residuals = expansion.residual_norms(X)
    zeta_mean = float(np.mean(loss.zeta(sample_residuals)))
    if not np.isfinite(zeta_mean) or zeta_mean <= 0.0:
        raise ParameterError("empirical zeta-mean is not positive; invalid loss")
    points = as_points(points, dim=X.shape[1], name="points")
    r = expansion.residual_norms(points)
    return kernel.nu * loss.rho_prime(r) / zeta_mean


def influence_bound_kde(X, sigma, points):
    """KDE bound: nu * |Phi(x) - mean embedding|_H (squared-loss case)."""
    X = as_points(X)
    kernel = GaussianKernel(sigma, X.shape[1])
    expansion = KernelExpansion(kernel, X, np.full(X.shape[0], 1.0 / X.shape[0]))
    points = as_points(points, dim=X.shape[1], name="points")
    return kernel.nu * expansion.residual_norms(points)


def inlyingness(X, sigma, loss, max_iter=200, tol=1e-9):
    """Converged reweighting weights; small weight marks an outlier."""
    est = RobustKernelDensityEstimator(sigma=sigma, loss=loss,
                                       max_iter=max_iter, tol=tol)
    est.fit(X)
    return est.weights_


@dataclass
class ConfidenceSpec:
    """Inputs of the uniform confidence-band radius.

    p is the entropy exponent of the kernel (p = d / (2m) for an
    m-times differentiable kernel on a d-dimensional domain), a_sigma
    the entropy constant, M the Lipschitz constant of the loss and mu
    its strong-convexity constant at radius 2*nu. gamma and C default
    to just above their admissible floors; the lower bound
    3 - log(9 a_sigma) for C can be negative, in which case it is
    clamped at zero before the margin is added.
    """

    n: int
    p: float
    a_sigma: float
    M: float
    mu: float
    alpha: float = 0.05
    gamma: float = None
    C: float = None

    def __post_init__(self):
        self.n = int(self.n)
        if self.n < 2:
            raise ParameterError("n must be at least 2")
        self.p = check_in_range(self.p, "p", 0.0, 1.0)
        self.a_sigma = float(self.a_sigma)
        if self.a_sigma <= 1.0:
            raise ParameterError(f"a_sigma must exceed 1, got {self.a_sigma}")
        self.alpha = check_in_range(self.alpha, "alpha", 0.0, 1.0)
        self.M = check_positive(self.M, "M")
        if not np.isfinite(self.mu) or self.mu <= 0.0:
            raise ParameterError(
                f"mu must be positive (strictly convex loss required), got {self.mu}"
            )
        if self.gamma is None:
            self.gamma = GAMMA_FLOOR + 1e-6
        elif self.gamma <= GAMMA_FLOOR:
            raise ParameterError(f"gamma must exceed 12/sqrt(log 2) = {GAMMA_FLOOR}")
        c_floor = max(3.0 - np.log(9.0 * self.a_sigma), 0.0)
        if self.C is None:
            self.C = c_floor + 1e-6
        elif self.C <= c_floor:
            raise ParameterError(f"C must exceed {c_floor}")


def strong_convexity_mu(loss, nu):
    """mu = 2 * min(phi(2 nu), rho''(2 nu)); positive only when the loss
    is strictly convex on the reachable residual range."""
    z = 2.0 * float(nu)
    return 2.0 * min(float(loss.phi(z)), float(loss.rho_second(z)))


def spec_from_loss(loss, nu, n, p, a_sigma=2.0, alpha=0.05, gamma=None, C=None):
    M = loss.lipschitz
    if not np.isfinite(M):
        raise ParameterError(f"loss {loss.name!r} is not Lipschitz; no finite radius")
    mu = strong_convexity_mu(loss, nu)
    return ConfidenceSpec(n=n, p=p, a_sigma=a_sigma, M=M, mu=mu,
                          alpha=alpha, gamma=gamma, C=C)


def entropy_rate(spec):
    """The xi(n, p) factor, chosen by exact comparison of p to 1/2."""
    n, p, a = spec.n, spec.p, spec.a_sigma
    if p < 0.5:
        return spec.gamma * a**p / (1.0 - 2.0 * p) / np.sqrt(n)
    if p == 0.5:
        return spec.gamma * spec.C * np.sqrt(a) * np.log(n) / np.sqrt(n)
    return spec.gamma * p * np.sqrt(a) / (2.0 * p - 1.0) / n ** (1.0 / (4.0 * p))


def confidence_radius(spec, nu):
    """Radius of the uniform confidence band at level 1 - alpha:

    (2 M nu / mu) * (xi(n, p) + sqrt(2 log(1/alpha) / n)).
    """
    nu = check_positive(nu, "nu")
    xi = entropy_rate(spec)
    tail = np.sqrt(2.0 * np.log(1.0 / spec.alpha) / spec.n)
    return float(2.0 * spec.M * nu / spec.mu * (xi + tail))
