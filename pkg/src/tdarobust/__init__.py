"""Robust persistence diagrams from robust kernel density estimates."""

from .density import (
    DistanceToMeasure,
    KernelDensityEstimator,
    KernelDistance,
    RobustKernelDensityEstimator,
    bandwidth_knn,
    eval_on_grid,
    hampel_from_residuals,
)
from .diagrams import (
    PersistenceDiagram,
    bottleneck,
    normalize_max_persistence,
    total_persistence,
    wasserstein,
)
from .grids import GridSpec, ScalarField, cover_grid
from .homology import h0_oracle, persistence
from .images import PersistenceImager
from .kernels import GaussianKernel, KernelExpansion
from .learn import LinearSVMClassifier, LinearSVMRegressor
from .losses import (
    CauchyLoss,
    CharbonnierLoss,
    HampelLoss,
    HuberLoss,
    SquaredLoss,
    loss_from_config,
    loss_profile,
    scaled_hampel,
    validate_assumptions,
)
from .robustness import (
    ConfidenceSpec,
    confidence_radius,
    empirical_influence,
    influence_bound_kde,
    influence_bound_rkde,
    inlyingness,
    spec_from_loss,
)
from .synth import Annulus, Circle, MixtureSpec, load_point_cloud, make_rng, outlier_ring, sample

__version__ = "0.1.0"

__all__ = [
    "Annulus",
    "CauchyLoss",
    "CharbonnierLoss",
    "Circle",
    "ConfidenceSpec",
    "DistanceToMeasure",
    "GaussianKernel",
    "GridSpec",
    "HampelLoss",
    "HuberLoss",
    "KernelDensityEstimator",
    "KernelDistance",
    "KernelExpansion",
    "LinearSVMClassifier",
    "LinearSVMRegressor",
    "MixtureSpec",
    "PersistenceDiagram",
    "PersistenceImager",
    "RobustKernelDensityEstimator",
    "ScalarField",
    "SquaredLoss",
    "bandwidth_knn",
    "bottleneck",
    "confidence_radius",
    "cover_grid",
    "empirical_influence",
    "eval_on_grid",
    "h0_oracle",
    "hampel_from_residuals",
    "influence_bound_kde",
    "influence_bound_rkde",
    "inlyingness",
    "load_point_cloud",
    "loss_from_config",
    "loss_profile",
    "make_rng",
    "normalize_max_persistence",
    "outlier_ring",
    "persistence",
    "sample",
    "scaled_hampel",
    "spec_from_loss",
    "total_persistence",
    "validate_assumptions",
    "wasserstein",
]
