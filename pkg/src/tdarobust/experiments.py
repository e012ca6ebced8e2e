"""Batch experiment pipelines behind the CLI.

Every experiment is a pure function of (config, output directory, seed):
replicates draw their randomness from per-purpose Philox streams, rows
are emitted in a fixed order, and floats are formatted with %.17g, so
re-running with the same config and seed reproduces the output files
byte for byte. Result CSVs are written atomically.
"""

import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.stats import binom

from .density import (
    DistanceToMeasure,
    KernelDensityEstimator,
    KernelDistance,
    RobustKernelDensityEstimator,
    bandwidth_knn,
    eval_on_grid,
    hampel_from_residuals,
)
from .diagrams import bottleneck, normalize_max_persistence, wasserstein
from .errors import ConfigError, DataError
from .grids import GridSpec
from .homology import persistence
from .images import PersistenceImager
from .kernels import GaussianKernel
from .learn import (
    LinearSVMClassifier,
    LinearSVMRegressor,
    mean_squared_error,
    misclassification_rate,
)
from .losses import loss_from_config, scaled_hampel
from .robustness import confidence_radius, entropy_rate, spec_from_loss
from .synth import (
    Annulus,
    Circle,
    MixtureSpec,
    load_point_cloud,
    make_rng,
    outlier_ring,
    sample,
    save_point_cloud,
)

EXPERIMENTS = ("bottleneck-sim", "influence-sim", "circles-sim",
               "shape-classify", "confband")


def thread_count():
    raw = os.environ.get("TDAROBUST_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _parallel_map(fn, items):
    """Order-preserving map, threaded when TDAROBUST_THREADS > 1."""
    workers = thread_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, header, rows):
    """Atomic CSV write with deterministic float formatting."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, payload):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def check_config(config, schema, where):
    """Validate a config mapping against {key: default}; unknown keys
    are rejected, None defaults mark required keys."""
    if not isinstance(config, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(config).__name__}")
    unknown = set(config) - set(schema)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    merged = {}
    for key, default in schema.items():
        if key in config:
            merged[key] = config[key]
        elif default is None:
            raise ConfigError(f"{where}: missing required key {key!r}")
        else:
            merged[key] = default
    return merged


# ---------------------------------------------------------------------------
# estimator construction from config


def build_estimator(config, X):
    """Resolve an estimator config against a sample.

    Bandwidths given as {"k": j} use the median j-th neighbor distance
    of X; DTM mass given as {"k": j} becomes j/n; hampel losses may give
    "quantiles" to place the knots at residual quantiles of the KDE on
    X, or "nu_scaled": true for knots (1, 2, 3) * nu.
    """
    cfg = dict(config)
    kind = str(cfg.pop("kind", "")).lower()
    if kind not in ("kde", "rkde", "dtm", "kdist"):
        raise ConfigError(f"unknown estimator kind {kind!r}")

    def resolve_sigma():
        sigma = cfg.pop("sigma", None)
        if isinstance(sigma, dict):
            sigma = bandwidth_knn(X, check_config(sigma, {"k": None}, "sigma")["k"])
        if sigma is None:
            raise ConfigError(f"estimator {kind!r} requires 'sigma'")
        return float(sigma)

    if kind == "kde":
        est = KernelDensityEstimator(sigma=resolve_sigma())
    elif kind == "kdist":
        est = KernelDistance(sigma=resolve_sigma())
    elif kind == "dtm":
        m = cfg.pop("m", None)
        if isinstance(m, dict):
            m = check_config(m, {"k": None}, "m")["k"] / len(X)
        if m is None:
            raise ConfigError("dtm estimator requires 'm'")
        est = DistanceToMeasure(m=float(m))
    else:
        sigma = resolve_sigma()
        loss_cfg = cfg.pop("loss", {"kind": "hampel", "quantiles": [0.5, 0.85, 0.99]})
        est = RobustKernelDensityEstimator(
            sigma=sigma,
            loss=_resolve_loss(loss_cfg, X, sigma),
            max_iter=int(cfg.pop("max_iter", 200)),
            tol=float(cfg.pop("tol", 1e-9)),
        )
    if cfg:
        raise ConfigError(f"estimator {kind!r}: unknown keys {sorted(cfg)}")
    return est


def _resolve_loss(loss_cfg, X, sigma):
    if not isinstance(loss_cfg, dict):
        raise ConfigError(f"loss config must be a mapping, got {loss_cfg!r}")
    loss_cfg = dict(loss_cfg)
    if loss_cfg.get("kind") == "hampel":
        if "quantiles" in loss_cfg:
            return hampel_from_residuals(X, sigma, quantiles=tuple(loss_cfg["quantiles"]))
        if loss_cfg.pop("nu_scaled", False):
            return scaled_hampel(GaussianKernel(sigma, X.shape[1]).nu)
    return loss_from_config(loss_cfg)


def adaptive_grid(points, sigma, cap=141, spacing_factor=2.5, margin=3.0):
    """Grid covering the points with spacing about sigma/spacing_factor."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    lo = points.min(axis=0) - margin * sigma
    hi = points.max(axis=0) + margin * sigma
    span = float((hi - lo).max())
    res = int(min(cap, np.ceil(span / (sigma / spacing_factor)) + 1))
    res = max(res, 2)
    return GridSpec(lo, hi, np.full(points.shape[1], res))


def _sign_test_less(u, v):
    """One-sided sign test p-value for the alternative U - V < 0."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    wins = int(np.sum(u < v))
    ties = int(np.sum(u == v))
    n_eff = u.size - ties
    if n_eff == 0:
        return 1.0, wins
    return float(binom.sf(wins - 1, n_eff, 0.5)), wins


def _quartiles(values):
    values = np.asarray(values, float)
    q1, q2, q3 = np.percentile(values, [25, 50, 75])
    return {"q1": float(q1), "median": float(q2), "q3": float(q3),
            "min": float(values.min()), "max": float(values.max())}


# ---------------------------------------------------------------------------
# bottleneck simulation (signal recovery under contamination)


BOTTLENECK_SCHEMA = {
    "n": 300,
    "pi": 0.3,
    "replicates": 50,
    "k": 10,
    "circles": [[-1.5, 0.0, 1.5], [2.0, 0.0, 1.0]],
    "box": [[-4.0, -4.0], [4.0, 4.0]],
    "hampel_quantiles": [0.5, 0.85, 0.99],
    "grid_cap": 141,
    "seed": 0,
}


def run_bottleneck_sim(config, out_dir, seed=None):
    """Per replicate: U = W_inf(robust diagram, clean-KDE diagram) and
    V = W_inf(plain-KDE diagram, clean-KDE diagram), both fit on the
    contaminated sample; summary holds boxplot quantiles and the
    one-sided sign test for U - V < 0."""
    cfg = check_config(config or {}, BOTTLENECK_SCHEMA, "bottleneck-sim")
    base_seed = int(cfg["seed"] if seed is None else seed)
    circles = [Circle((c[0], c[1]), c[2]) for c in cfg["circles"]]
    box = (tuple(cfg["box"][0]), tuple(cfg["box"][1]))
    n, pi = int(cfg["n"]), float(cfg["pi"])
    m = int(np.rint(pi * n))

    def one(rep):
        spec = MixtureSpec(signal=circles, box=box, pi=0.0, n=n,
                           seed=base_seed + rep, stream=0)
        X, _ = sample(spec)
        rng = make_rng(base_seed + rep, 1)
        Y = rng.uniform(box[0], box[1], size=(m, 2))
        XY = np.vstack([X, Y])
        sigma = bandwidth_knn(XY, int(cfg["k"]))
        grid = adaptive_grid(XY, sigma, cap=int(cfg["grid_cap"]))
        loss = hampel_from_residuals(XY, sigma,
                                     quantiles=tuple(cfg["hampel_quantiles"]))
        d_rob = persistence(eval_on_grid(
            RobustKernelDensityEstimator(sigma=sigma, loss=loss).fit(XY), grid), 1)[1]
        d_kde = persistence(eval_on_grid(
            KernelDensityEstimator(sigma=sigma).fit(XY), grid), 1)[1]
        d_ref = persistence(eval_on_grid(
            KernelDensityEstimator(sigma=sigma).fit(X), grid), 1)[1]
        return bottleneck(d_rob, d_ref), bottleneck(d_kde, d_ref)

    pairs = _parallel_map(one, list(range(int(cfg["replicates"]))))
    u = [p[0] for p in pairs]
    v = [p[1] for p in pairs]
    p_value, wins = _sign_test_less(u, v)

    rows = [(rep, u[rep], v[rep]) for rep in range(len(pairs))]
    write_csv(os.path.join(out_dir, "bottleneck_sim.csv"),
              ["replicate", "u_robust", "v_kde"], rows)
    summary = {
        "experiment": "bottleneck-sim",
        "config": cfg,
        "u": _quartiles(u),
        "v": _quartiles(v),
        "wins_u_lt_v": wins,
        "sign_test_p": p_value,
    }
    write_json(os.path.join(out_dir, "bottleneck_sim_summary.json"), summary)
    return summary


# ---------------------------------------------------------------------------
# influence simulation (outliers at growing distance)


INFLUENCE_SCHEMA = {
    "n": 250,
    "pi": 0.1,
    "replicates": 20,
    "k": 5,
    "radii": [5.0, 10.0, 20.0],
    "annulus": [2.5, 1.0],
    "box": [[-5.0, -5.0], [5.0, 5.0]],
    "grid": {"lower": [-22.0, -22.0], "upper": [22.0, 22.0], "resolution": [111, 111]},
    "hampel_quantiles": [0.5, 0.8, 0.95],
    "dims": [0, 1],
    "seed": 0,
}


def run_influence_sim(config, out_dir, seed=None):
    """L-inf, bottleneck and 1-Wasserstein influence of a ring of
    outliers at distance r, for KDE / robust KDE / DTM."""
    cfg = check_config(config or {}, INFLUENCE_SCHEMA, "influence-sim")
    base_seed = int(cfg["seed"] if seed is None else seed)
    annulus = Annulus(cfg["annulus"][0], cfg["annulus"][1])
    box = (tuple(cfg["box"][0]), tuple(cfg["box"][1]))
    grid_cfg = check_config(cfg["grid"], {"lower": None, "upper": None,
                                          "resolution": None}, "grid")
    grid = GridSpec(grid_cfg["lower"], grid_cfg["upper"], grid_cfg["resolution"])
    radii = [float(r) for r in cfg["radii"]]
    dims = [int(d) for d in cfg["dims"]]
    max_dim = max(dims)

    def one(rep):
        spec = MixtureSpec(signal=annulus, box=box, pi=float(cfg["pi"]),
                           n=int(cfg["n"]), seed=base_seed + rep, stream=0)
        X, _ = sample(spec)
        sigma = bandwidth_knn(X, int(cfg["k"]))
        loss = hampel_from_residuals(X, sigma,
                                     quantiles=tuple(cfg["hampel_quantiles"]))
        estimators = {
            "kde": KernelDensityEstimator(sigma=sigma),
            "rkde": RobustKernelDensityEstimator(sigma=sigma, loss=loss),
            "dtm": DistanceToMeasure(m=int(cfg["k"]) / len(X)),
        }
        base_fields = {}
        base_diagrams = {}
        for name, est in estimators.items():
            field = eval_on_grid(est.fit(X), grid)
            base_fields[name] = field
            base_diagrams[name] = persistence(field, max_dim)
        rows = []
        for r in radii:
            Y = outlier_ring(r, count=0, seed=base_seed + rep, stream=1000 + int(r))
            XY = np.vstack([X, Y])
            for name in ("kde", "rkde", "dtm"):
                if name == "kde":
                    est = KernelDensityEstimator(sigma=sigma)
                elif name == "rkde":
                    est = RobustKernelDensityEstimator(sigma=sigma, loss=loss)
                else:
                    est = DistanceToMeasure(m=int(cfg["k"]) / len(XY))
                field = eval_on_grid(est.fit(XY), grid)
                dgms = persistence(field, max_dim)
                rows.append((r, name, "linf", "", field.sup_diff(base_fields[name]),
                             base_seed + rep))
                for dim in dims:
                    rows.append((r, name, "w_inf", dim,
                                 bottleneck(dgms[dim], base_diagrams[name][dim]),
                                 base_seed + rep))
                    rows.append((r, name, "w_1", dim,
                                 wasserstein(dgms[dim], base_diagrams[name][dim], 1.0),
                                 base_seed + rep))
        return rows

    all_rows = []
    for chunk in _parallel_map(one, list(range(int(cfg["replicates"])))):
        all_rows.extend(chunk)
    write_csv(os.path.join(out_dir, "influence_sim.csv"),
              ["r", "estimator", "metric", "dim", "value", "seed"], all_rows)

    means = {}
    for r, name, metric, dim, value, _ in all_rows:
        means.setdefault(f"{name}/{metric}/{dim}/r={r:g}", []).append(value)
    summary = {
        "experiment": "influence-sim",
        "config": cfg,
        "mean": {key: float(np.mean(vals)) for key, vals in sorted(means.items())},
    }
    write_json(os.path.join(out_dir, "influence_sim_summary.json"), summary)
    return summary


# ---------------------------------------------------------------------------
# random circles: regression on persistence images


CIRCLES_SCHEMA = {
    "clouds": 60,
    "n": 700,
    "pi": 0.5,
    "k": 5,
    "radius_range": [0.3, 0.5],
    "center_box": [0.0, 2.0],
    "max_circles": 5,
    "hampel_quantiles": [0.5, 0.85, 0.99],
    "h_ladder": [0.02, 0.05, 0.1],
    "image_resolution": [20, 20],
    "image_weight": "constant",
    "normalize": True,
    "splits": 30,
    "train_fraction": 0.75,
    "epochs": 200,
    "lam": 1e-3,
    "grid_cap": 161,
    "seed": 0,
}


def sample_circle_scene(seed, radius_range, center_box, max_circles, n, pi,
                        noise_margin=0.1):
    """One labelled point cloud: uniform count of non-overlapping
    circles plus uniform noise on their tight enclosing rectangle."""
    rng = make_rng(seed, 0)
    target = int(rng.integers(1, max_circles + 1))
    circles = []
    tries = 0
    while len(circles) < target and tries < 500:
        tries += 1
        c = rng.uniform(center_box[0], center_box[1], size=2)
        r = rng.uniform(radius_range[0], radius_range[1])
        if all(np.linalg.norm(c - np.array(o.center)) > r + o.radius + 0.1
               for o in circles):
            circles.append(Circle(tuple(c), r))
    lo = np.min([np.array(c.center) - c.radius for c in circles], axis=0) - noise_margin
    hi = np.max([np.array(c.center) + c.radius for c in circles], axis=0) + noise_margin
    spec = MixtureSpec(signal=circles, box=(tuple(lo), tuple(hi)), pi=pi, n=n,
                       seed=seed, stream=1)
    X, _ = sample(spec)
    return len(circles), X


def _image_features(diagram_sets, h, resolution, weight, normalize):
    """Stacked image features for a dict {estimator: [diagram, ...]}."""
    feats = {}
    for name, dgms in diagram_sets.items():
        use = [normalize_max_persistence(d) if (normalize and len(d)) else d
               for d in dgms]
        ranges = dict(birth_range=(0.0, 1.0), pers_range=(0.0, 1.0)) if normalize else {}
        imager = PersistenceImager(resolution=tuple(resolution), bandwidth=h,
                                   weight=weight, **ranges).fit(use)
        feats[name] = imager.transform(use)
    return feats


def run_circles_sim(config, out_dir, seed=None):
    """Predict the number of circles from persistence images; emits the
    mean regression MSE per estimator and image bandwidth."""
    cfg = check_config(config or {}, CIRCLES_SCHEMA, "circles-sim")
    base_seed = int(cfg["seed"] if seed is None else seed)
    n_clouds = int(cfg["clouds"])

    def make(i):
        target, X = sample_circle_scene(
            base_seed + 1000 + i, tuple(cfg["radius_range"]),
            tuple(cfg["center_box"]), int(cfg["max_circles"]),
            int(cfg["n"]), float(cfg["pi"]))
        sigma = bandwidth_knn(X, int(cfg["k"]))
        grid = adaptive_grid(X, sigma, cap=int(cfg["grid_cap"]))
        loss = hampel_from_residuals(X, sigma,
                                     quantiles=tuple(cfg["hampel_quantiles"]))
        out = {}
        for name in ("kde", "rkde", "dtm"):
            if name == "kde":
                est = KernelDensityEstimator(sigma=sigma)
            elif name == "rkde":
                est = RobustKernelDensityEstimator(sigma=sigma, loss=loss)
            else:
                est = DistanceToMeasure(m=int(cfg["k"]) / len(X))
            out[name] = persistence(eval_on_grid(est.fit(X), grid), 1)[1]
        return target, out

    made = _parallel_map(make, list(range(n_clouds)))
    targets = np.array([m[0] for m in made], dtype=float)
    diagram_sets = {name: [m[1][name] for m in made] for name in ("kde", "rkde", "dtm")}

    rows = []
    means = {}
    for h in [float(x) for x in cfg["h_ladder"]]:
        feats = _image_features(diagram_sets, h, cfg["image_resolution"],
                                cfg["image_weight"], bool(cfg["normalize"]))
        for name in ("kde", "rkde", "dtm"):
            mses = []
            for split in range(int(cfg["splits"])):
                rng = make_rng(base_seed + 5000 + split, 0)
                perm = rng.permutation(n_clouds)
                ntr = int(float(cfg["train_fraction"]) * n_clouds)
                tr, te = perm[:ntr], perm[ntr:]
                model = LinearSVMRegressor(lam=float(cfg["lam"]),
                                           epochs=int(cfg["epochs"]),
                                           random_state=split)
                model.fit(feats[name][tr], targets[tr])
                mse = mean_squared_error(targets[te], model.predict(feats[name][te]))
                mses.append(mse)
                rows.append((name, h, split, mse))
            means[(name, h)] = float(np.mean(mses))

    write_csv(os.path.join(out_dir, "circles_sim.csv"),
              ["estimator", "h", "split", "mse"], rows)
    h_ladder = [float(x) for x in cfg["h_ladder"]]
    best_h = min(h_ladder, key=lambda h: min(means[(n, h)] for n in ("kde", "rkde", "dtm")))
    summary = {
        "experiment": "circles-sim",
        "config": cfg,
        "mean_mse": {f"{name}/h={h:g}": means[(name, h)]
                     for name in ("kde", "rkde", "dtm") for h in h_ladder},
        "best_common_h": best_h,
        "at_best_h": {name: means[(name, best_h)] for name in ("kde", "rkde", "dtm")},
    }
    write_json(os.path.join(out_dir, "circles_sim_summary.json"), summary)
    return summary


# ---------------------------------------------------------------------------
# shape classification from a point-cloud directory


SHAPE_SCHEMA = {
    "data_dir": None,
    "header": False,
    "k": 5,
    "estimators": ["kde", "rkde", "dtm"],
    "hampel_quantiles": [0.5, 0.85, 0.99],
    "h_ladder": [0.02, 0.05, 0.1],
    "image_resolution": [20, 20],
    "image_weight": "constant",
    "normalize": True,
    "splits": 30,
    "train_fraction": 0.9,
    "epochs": 200,
    "lam": 1e-3,
    "grid_cap": 141,
    "seed": 0,
}


def load_shape_classes(data_dir, header=False):
    """Point clouds from class subdirectories of data_dir (CSV files)."""
    if not os.path.isdir(data_dir):
        raise DataError(f"shape-classify needs a point-cloud directory: {data_dir}")
    classes = sorted(d for d in os.listdir(data_dir)
                     if os.path.isdir(os.path.join(data_dir, d)))
    if len(classes) < 2:
        raise DataError(f"{data_dir}: need at least 2 class subdirectories")
    clouds, labels = [], []
    for ci, cls in enumerate(classes):
        files = sorted(f for f in os.listdir(os.path.join(data_dir, cls))
                       if f.endswith(".csv"))
        if not files:
            raise DataError(f"{data_dir}/{cls}: no CSV point clouds")
        for fname in files:
            clouds.append(load_point_cloud(os.path.join(data_dir, cls, fname),
                                           header=header))
            labels.append(ci)
    return clouds, np.asarray(labels), classes


def run_shape_classify(config, out_dir, seed=None):
    """Classify point clouds by concatenated H0+H1 persistence images
    (normalized diagrams) with a one-vs-rest linear SVM."""
    cfg = check_config(config or {}, SHAPE_SCHEMA, "shape-classify")
    base_seed = int(cfg["seed"] if seed is None else seed)
    clouds, labels, classes = load_shape_classes(cfg["data_dir"],
                                                 header=bool(cfg["header"]))
    estimators = list(cfg["estimators"])

    def diagrams_for(X):
        sigma = bandwidth_knn(X, int(cfg["k"]))
        grid = adaptive_grid(X, sigma, cap=int(cfg["grid_cap"]))
        loss = hampel_from_residuals(X, sigma,
                                     quantiles=tuple(cfg["hampel_quantiles"]))
        out = {}
        for name in estimators:
            if name == "kde":
                est = KernelDensityEstimator(sigma=sigma)
            elif name == "rkde":
                est = RobustKernelDensityEstimator(sigma=sigma, loss=loss)
            elif name == "dtm":
                est = DistanceToMeasure(m=int(cfg["k"]) / len(X))
            else:
                raise ConfigError(f"unknown estimator {name!r} in shape-classify")
            out[name] = persistence(eval_on_grid(est.fit(X), grid), 1)
        return out

    per_cloud = _parallel_map(diagrams_for, clouds)
    n_clouds = len(clouds)

    rows = []
    means = {}
    for h in [float(x) for x in cfg["h_ladder"]]:
        feats = {}
        for name in estimators:
            blocks = []
            for dim in (0, 1):  # H0 images first, then H1
                sets = {name: [pc[name][dim] for pc in per_cloud]}
                blocks.append(_image_features(sets, h, cfg["image_resolution"],
                                              cfg["image_weight"],
                                              bool(cfg["normalize"]))[name])
            feats[name] = np.hstack(blocks)
        for name in estimators:
            errs = []
            for split in range(int(cfg["splits"])):
                rng = make_rng(base_seed + 6000 + split, 0)
                perm = rng.permutation(n_clouds)
                ntr = int(float(cfg["train_fraction"]) * n_clouds)
                tr, te = perm[:ntr], perm[ntr:]
                clf = LinearSVMClassifier(lam=float(cfg["lam"]),
                                          epochs=int(cfg["epochs"]),
                                          random_state=split)
                clf.fit(feats[name][tr], labels[tr])
                err = misclassification_rate(labels[te], clf.predict(feats[name][te]))
                errs.append(err)
                rows.append((name, h, split, err))
            means[(name, h)] = float(np.mean(errs))

    write_csv(os.path.join(out_dir, "shape_classify.csv"),
              ["estimator", "h", "split", "error"], rows)
    h_ladder = [float(x) for x in cfg["h_ladder"]]
    best_h = min(h_ladder, key=lambda h: min(means[(n, h)] for n in estimators))
    summary = {
        "experiment": "shape-classify",
        "config": {k: v for k, v in cfg.items()},
        "classes": classes,
        "mean_error": {f"{name}/h={h:g}": means[(name, h)]
                       for name in estimators for h in h_ladder},
        "best_common_h": best_h,
        "at_best_h": {name: means[(name, best_h)] for name in estimators},
    }
    write_json(os.path.join(out_dir, "shape_classify_summary.json"), summary)
    return summary


def make_shape_classes(out_dir, per_class=20, n=350, pi=0.5, seed=0):
    """Synthesize the three stand-in shape classes into a directory
    layout consumable by shape-classify: one ring, two rings, one disk."""
    specs = {
        "one-ring": lambda: [Circle((0.0, 0.0), 0.8)],
        "two-rings": lambda: [Circle((-0.8, 0.0), 0.5), Circle((0.8, 0.0), 0.5)],
        "disk": None,  # annulus covering most of the disk
    }
    for ci, cls in enumerate(sorted(specs)):
        cls_dir = os.path.join(out_dir, cls)
        os.makedirs(cls_dir, exist_ok=True)
        for i in range(per_class):
            if cls == "disk":
                signal = Annulus(0.35, 0.65)
            else:
                signal = specs[cls]()
            spec = MixtureSpec(signal=signal, box=((-1.6, -1.6), (1.6, 1.6)),
                               pi=pi, n=n, seed=seed + 100 * ci + i, stream=2)
            X, _ = sample(spec)
            save_point_cloud(X, os.path.join(cls_dir, f"cloud_{i:03d}.csv"))
    return out_dir


# ---------------------------------------------------------------------------
# confidence-band radii


CONFBAND_SCHEMA = {
    "loss": {"kind": "charbonnier", "alpha": 1.0},
    "sigma": 0.5,
    "dim": 2,
    "p_values": [0.25, 0.5, 0.75],
    "a_sigma": 2.0,
    "alpha": 0.05,
    "n_ladder": [16, 32, 64, 128, 256, 512, 1024, 2048, 4096],
    "seed": 0,
}


def run_confband(config, out_dir, seed=None):
    """Uniform confidence-band radii over a ladder of sample sizes."""
    cfg = check_config(config or {}, CONFBAND_SCHEMA, "confband")
    loss = loss_from_config(cfg["loss"])
    kernel = GaussianKernel(float(cfg["sigma"]), int(cfg["dim"]))
    rows = []
    for p in [float(x) for x in cfg["p_values"]]:
        for n in [int(x) for x in cfg["n_ladder"]]:
            spec = spec_from_loss(loss, kernel.nu, n=n, p=p,
                                  a_sigma=float(cfg["a_sigma"]),
                                  alpha=float(cfg["alpha"]))
            rows.append((p, n, entropy_rate(spec), confidence_radius(spec, kernel.nu)))
    write_csv(os.path.join(out_dir, "confband.csv"),
              ["p", "n", "xi", "delta"], rows)
    summary = {
        "experiment": "confband",
        "config": cfg,
        "monotone_decreasing": {
            f"p={p:g}": bool(np.all(np.diff([r[3] for r in rows if r[0] == p]) < 0))
            for p in [float(x) for x in cfg["p_values"]]
        },
    }
    write_json(os.path.join(out_dir, "confband_summary.json"), summary)
    return summary


RUNNERS = {
    "bottleneck-sim": run_bottleneck_sim,
    "influence-sim": run_influence_sim,
    "circles-sim": run_circles_sim,
    "shape-classify": run_shape_classify,
    "confband": run_confband,
}


def run_experiment(name, config, out_dir, seed=None):
    if name not in RUNNERS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {EXPERIMENTS}")
    os.makedirs(out_dir, exist_ok=True)
    return RUNNERS[name](config, out_dir, seed=seed)
