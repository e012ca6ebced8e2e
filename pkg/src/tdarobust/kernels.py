"""Radial reproducing kernels and RKHS geometry via the kernel trick.

Only the Gaussian profile ships; K(x, y) = sigma^-d * psi(|x-y|/sigma)
with psi the standard normal density in d dimensions, so that every
kernel section integrates to one and sup K = sigma^-d * psi(0).
"""

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ParameterError
from .validation import as_points, as_weights, check_positive

_EVAL_CHUNK = 4096  # rows of the query block per pairwise-distance call


class GaussianKernel:
    """Gaussian reproducing kernel with bandwidth sigma on R^d."""

    profile = "gaussian"

    def __init__(self, sigma, dim):
        self.sigma = check_positive(sigma, "sigma")
        self.dim = int(dim)
        if self.dim < 1:
            raise ParameterError(f"dim must be a positive integer, got {dim}")

    @property
    def kappa(self):
        """sup K = sigma^-d * (2*pi)^(-d/2)."""
        return self.sigma ** (-self.dim) * (2.0 * np.pi) ** (-0.5 * self.dim)

    @property
    def nu(self):
        """sqrt(sup K); the RKHS norm of a single feature map."""
        return np.sqrt(self.kappa)

    def __call__(self, x, y):
        x = as_points(x, dim=self.dim, name="x")
        y = as_points(y, dim=self.dim, name="y")
        if x.shape[0] != 1 or y.shape[0] != 1:
            raise ParameterError("kernel(x, y) expects single points; use cross()")
        return float(self.cross(x, y)[0, 0])

    def cross(self, X, Y):
        """Kernel matrix K[i, j] = K(X_i, Y_j)."""
        X = as_points(X, dim=self.dim, name="X")
        Y = as_points(Y, dim=self.dim, name="Y")
        sq = cdist(X, Y, "sqeuclidean")
        return self.kappa * np.exp(-0.5 * sq / (self.sigma * self.sigma))

    def gram(self, X):
        """Symmetric PSD Gram matrix with diagonal exactly kappa."""
        X = as_points(X, dim=self.dim, name="X")
        return self.cross(X, X)

    def gradient_bound(self):
        """Upper bound on |grad_x K(x, y)|, used for grid-resolution slack."""
        return self.kappa / self.sigma * np.exp(-0.5)

    def params(self):
        return {"profile": self.profile, "sigma": self.sigma, "dim": self.dim}


def kernel_from_config(config, dim=None):
    if isinstance(config, GaussianKernel):
        return config
    if not isinstance(config, dict):
        raise ParameterError(f"kernel config must be a mapping, got {config!r}")
    profile = str(config.get("profile", "gaussian")).lower()
    if profile != "gaussian":
        raise ParameterError(f"unknown kernel profile {profile!r}")
    if "sigma" not in config:
        raise ParameterError("kernel config requires 'sigma'")
    d = config.get("dim", dim)
    if d is None:
        raise ParameterError("kernel config requires 'dim'")
    return GaussianKernel(config["sigma"], d)


class KernelExpansion:
    """Convex combination of feature maps: g = sum_i w_i K(., c_i).

    This is the common representation for the KDE, the robust KDE, and
    empirical mean embeddings; weights are nonnegative and sum to one.
    Norms and inner products are computed through the Gram matrix.
    """

    def __init__(self, kernel, centers, weights, gram=None):
        self.kernel = kernel
        self.centers = as_points(centers, dim=kernel.dim, name="centers")
        self.weights = as_weights(weights, n=self.centers.shape[0])
        self._gram = gram
        self._quad = None  # w' G w

    @property
    def gram(self):
        if self._gram is None:
            self._gram = self.kernel.gram(self.centers)
        return self._gram

    @property
    def quad_form(self):
        """w' G w = |g|_H^2."""
        if self._quad is None:
            gw = self.gram @ self.weights
            self._quad = float(self.weights @ gw)
        return self._quad

    def rkhs_norm(self):
        return float(np.sqrt(max(self.quad_form, 0.0)))

    def evaluate(self, points):
        """g(x) = sum_i w_i K(x, c_i), chunked over query rows."""
        points = as_points(points, dim=self.kernel.dim, name="points")
        out = np.empty(points.shape[0])
        for start in range(0, points.shape[0], _EVAL_CHUNK):
            block = points[start:start + _EVAL_CHUNK]
            out[start:start + _EVAL_CHUNK] = self.kernel.cross(block, self.centers) @ self.weights
        return out

    def residual_norms(self, points):
        """|Phi(x) - g|_H = sqrt(kappa - 2 g(x) + w' G w), clamped at 0."""
        vals = self.evaluate(points)
        sq = self.kernel.kappa - 2.0 * vals + self.quad_form
        return np.sqrt(np.clip(sq, 0.0, None))

    def residual_norm(self, x):
        return float(self.residual_norms(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def sup_norm_on_grid(self, points):
        """max |g| over the given evaluation points."""
        points = as_points(points, dim=self.kernel.dim, name="grid points")
        return float(np.max(np.abs(self.evaluate(points))))
