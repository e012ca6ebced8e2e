import math

import numpy as np
import pytest
from sklearn.base import clone

from tdarobust import (
    CauchyLoss,
    CharbonnierLoss,
    DistanceToMeasure,
    GaussianKernel,
    GridSpec,
    HampelLoss,
    HuberLoss,
    KernelDensityEstimator,
    KernelDistance,
    RobustKernelDensityEstimator,
    SquaredLoss,
    bandwidth_knn,
    eval_on_grid,
    hampel_from_residuals,
    scaled_hampel,
)
from tdarobust.errors import DegenerateWeightsError, ParameterError


def test_kde_point_values():
    kde = KernelDensityEstimator(sigma=1.0).fit([[0.0]])
    assert kde.evaluate([[0.0]])[0] == pytest.approx(0.3989422804014327, abs=1e-12)
    kde2 = KernelDensityEstimator(sigma=1.0).fit([[-1.0], [1.0]])
    assert kde2.evaluate([[0.0]])[0] == pytest.approx(0.24197072451914337, abs=1e-12)


def test_kde_integrates_to_one(rng):
    X = rng.normal(size=(40, 1))
    kde = KernelDensityEstimator(sigma=0.6).fit(X)
    grid = np.linspace(-8, 8, 4001)[:, None]
    vals = kde.evaluate(grid)
    integral = np.trapezoid(vals, grid[:, 0])
    assert integral == pytest.approx(1.0, abs=1e-4)


def test_rkde_squared_equals_kde(rng):
    X = rng.normal(size=(60, 2))
    rkde = RobustKernelDensityEstimator(sigma=0.5, loss=SquaredLoss()).fit(X)
    kde = KernelDensityEstimator(sigma=0.5).fit(X)
    assert np.max(np.abs(rkde.weights_ - kde.expansion_.weights)) <= 1e-12
    pts = rng.normal(size=(20, 2))
    assert np.array_equal(rkde.evaluate(pts), kde.evaluate(pts))


def test_rkde_single_point():
    est = RobustKernelDensityEstimator(sigma=1.0, loss=HuberLoss()).fit([[3.0]])
    assert est.weights_.tolist() == [1.0]


def test_rkde_symmetric_pair():
    est = RobustKernelDensityEstimator(sigma=1.0, loss=HuberLoss()).fit([[-1.0], [1.0]])
    assert est.weights_ == pytest.approx([0.5, 0.5], abs=1e-12)


def test_rkde_downweights_far_point():
    X = np.concatenate([np.linspace(0, 1, 10), [50.0]])[:, None]
    est = RobustKernelDensityEstimator(sigma=0.5, loss=HuberLoss()).fit(X)
    assert est.weights_[-1] < 1.0 / 11.0
    assert est.converged_


@pytest.mark.parametrize("loss", [
    HuberLoss(), CharbonnierLoss(1.0), CharbonnierLoss(1.7), CauchyLoss(),
], ids=lambda l: repr(l))
def test_kirwls_risk_monotone(loss, rng):
    for trial in range(6):
        X = rng.normal(size=(int(rng.integers(10, 80)), 2)) * rng.uniform(0.5, 3)
        est = RobustKernelDensityEstimator(sigma=0.4, loss=loss).fit(X)
        trace = np.asarray(est.risk_trace_)
        assert np.all(np.diff(trace) <= 1e-12)
        assert est.converged_ and est.n_iter_ <= 200


def test_kirwls_weights_stay_normalized(rng):
    X = rng.normal(size=(50, 2))
    kernel = GaussianKernel(0.4, 2)
    est = RobustKernelDensityEstimator(
        sigma=0.4, loss=scaled_hampel(kernel.nu)).fit(X)
    assert est.weights_.min() >= 0.0
    assert est.weights_.sum() == pytest.approx(1.0, abs=1e-10)
    trace = np.asarray(est.risk_trace_)
    assert np.all(np.diff(trace) <= 1e-12)


def test_kirwls_degenerate_weights_error(rng):
    X = rng.normal(size=(30, 2)) * 2
    # knots far below any reachable residual put every point past the cutoff
    with pytest.raises(DegenerateWeightsError):
        RobustKernelDensityEstimator(sigma=0.4, loss=HampelLoss(0.01, 0.02, 0.03)).fit(X)


def test_dtm_examples():
    X = [[0.0], [2.0]]
    d1 = DistanceToMeasure(m=0.5).fit(X)  # k = 1
    assert d1.evaluate([[0.0]])[0] == 0.0
    assert d1.evaluate([[1.0]])[0] == 1.0
    d2 = DistanceToMeasure(m=1.0).fit(X)  # k = 2
    assert d2.evaluate([[0.0]])[0] == pytest.approx(math.sqrt(2.0), abs=1e-12)


def test_dtm_is_one_lipschitz(rng):
    X = rng.normal(size=(60, 2))
    est = DistanceToMeasure(m=0.1).fit(X)
    a = rng.normal(size=(100, 2)) * 3
    b = a + rng.normal(size=(100, 2)) * 0.05
    gap = np.abs(est.evaluate(a) - est.evaluate(b))
    dist = np.linalg.norm(a - b, axis=1)
    assert np.all(gap <= dist + 1e-12)


def test_dtm_parameter_errors():
    with pytest.raises(ParameterError):
        DistanceToMeasure(m=0.0).fit([[0.0], [1.0]])
    with pytest.raises(ParameterError):
        DistanceToMeasure(m=1.5).fit([[0.0], [1.0]])


def test_kdist_examples(rng):
    kd = KernelDistance(sigma=1.0).fit([[0.0]])
    assert kd.evaluate([[0.0]])[0] == 0.0
    assert kd.evaluate([[1000.0]])[0] == pytest.approx(
        math.sqrt(kd.expansion_.kernel.kappa + kd.expansion_.quad_form), abs=1e-12)
    # monotone relation with the kde on the same sample
    X = rng.normal(size=(30, 2))
    kd = KernelDistance(sigma=0.8).fit(X)
    kde = KernelDensityEstimator(sigma=0.8).fit(X)
    pts = rng.normal(size=(50, 2)) * 2
    f = kde.evaluate(pts)
    d = kd.evaluate(pts)
    order = np.argsort(f)
    assert np.all(np.diff(d[order]) <= 1e-12)  # larger density, smaller distance


def test_bandwidth_examples():
    assert bandwidth_knn([[0.0], [1.0], [3.0]], 1) == 1.0
    grid = np.arange(6, dtype=float)[:, None] * 0.25
    assert bandwidth_knn(grid, 1) == 0.25
    assert bandwidth_knn([[0.0], [5.0]], 1) == 5.0
    with pytest.raises(ParameterError):
        bandwidth_knn([[0.0]], 1)
    with pytest.raises(ParameterError):
        bandwidth_knn([[0.0], [1.0]], 2)


def test_eval_on_grid_shapes_and_tags(rng):
    grid = GridSpec([-2, -2], [2, 2], [41, 41])
    kde = KernelDensityEstimator(sigma=0.5).fit([[0.0, 0.0]])
    field = eval_on_grid(kde, grid)
    assert field.direction == "superlevel" and field.nonneg
    assert field.values.argmax() == grid.size // 2  # center vertex
    assert field.values.min() >= 0.0
    dtm = DistanceToMeasure(m=0.5).fit(rng.normal(size=(20, 2)))
    assert eval_on_grid(dtm, grid).direction == "sublevel"


def test_grid_refinement_sup_shift(rng):
    X = rng.normal(size=(25, 2))
    kde = KernelDensityEstimator(sigma=0.5).fit(X)
    coarse = GridSpec([-4, -4], [4, 4], [41, 41])
    fine = GridSpec([-4, -4], [4, 4], [81, 81])
    sup_c = np.max(eval_on_grid(kde, coarse).values)
    sup_f = np.max(eval_on_grid(kde, fine).values)
    lipschitz = kde.expansion_.kernel.gradient_bound()
    assert abs(sup_f - sup_c) <= lipschitz * float(np.linalg.norm(coarse.spacing))


def test_sklearn_protocol():
    est = RobustKernelDensityEstimator(sigma=0.7, loss=HuberLoss(), max_iter=50)
    params = est.get_params()
    assert params["sigma"] == 0.7 and params["max_iter"] == 50
    cloned = clone(est)
    assert cloned.get_params()["sigma"] == 0.7
    assert not hasattr(cloned, "expansion_")


def test_hampel_from_residuals(rng):
    X = rng.normal(size=(80, 2))
    loss = hampel_from_residuals(X, 0.5, quantiles=(0.5, 0.8, 0.95))
    assert 0 < loss.a < loss.b < loss.c
    with pytest.raises(ParameterError):
        hampel_from_residuals(X, 0.5, quantiles=(0.9, 0.5, 0.99))
