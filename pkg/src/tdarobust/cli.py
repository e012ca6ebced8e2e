"""Command-line front-end.

    tdarobust <command> --config path.json [--out dir] [--seed N] [--header]

Commands: density, pd, dist, pimg, experiment <name>. All randomness is
seeded from the config (or the --seed override); errors are reported as
one JSON object on stderr with exit codes 2 (config), 3 (data) and
4 (numeric failure). TDAROBUST_THREADS caps replicate parallelism.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import experiments
from .diagrams import bottleneck, diagrams_from_json, diagrams_to_json, wasserstein
from .errors import ConfigError, DataError, NumericError, ParameterError
from .grids import cover_grid, grid_from_config, read_field, write_field
from .homology import persistence
from .images import PersistenceImager, image_to_csv
from .synth import load_point_cloud


def _load_config(path):
    if path is None:
        raise ConfigError("--config is required")
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def _resolve_grid(cfg, points, sigma=None):
    if "auto" in cfg:
        auto = experiments.check_config(
            cfg["auto"], {"resolution": 101, "margin": 3.0}, "grid.auto")
        return cover_grid(points, int(auto["resolution"]),
                          margin=float(auto["margin"]), sigma=sigma)
    return grid_from_config(cfg)


DENSITY_SCHEMA = {
    "input": None,
    "estimator": None,
    "grid": None,
    "output": "field",
}


def _fit_field(cfg, out_dir, header):
    cfg = experiments.check_config(cfg, DENSITY_SCHEMA, "density")
    X = load_point_cloud(cfg["input"], header=header)
    est = experiments.build_estimator(cfg["estimator"], X)
    est.fit(X)
    sigma = getattr(est, "sigma", None)
    grid = _resolve_grid(cfg["grid"], X, sigma=sigma)
    from .density import eval_on_grid

    field = eval_on_grid(est, grid)
    return field, cfg


def cmd_density(config, out_dir, header=False):
    field, cfg = _fit_field(config, out_dir, header)
    path = os.path.join(out_dir, cfg["output"] + ".csv")
    write_field(field, path)
    return {"field": path, "direction": field.direction,
            "min": float(field.values.min()), "max": float(field.values.max())}


PD_SCHEMA = {
    "field": "",
    "input": "",
    "estimator": {},
    "grid": {},
    "max_dim": -1,
    "essential_death": "auto",
    "output": "diagrams",
}


def cmd_pd(config, out_dir, header=False):
    cfg = experiments.check_config(config, PD_SCHEMA, "pd")
    if cfg["field"]:
        field = read_field(cfg["field"])
    elif cfg["input"]:
        field, _ = _fit_field({"input": cfg["input"], "estimator": cfg["estimator"],
                               "grid": cfg["grid"], "output": "field"},
                              out_dir, header)
    else:
        raise ConfigError("pd needs either 'field' or 'input' + estimator + grid")
    max_dim = None if cfg["max_dim"] < 0 else int(cfg["max_dim"])
    diagrams = persistence(field, max_dim=max_dim,
                           essential_death=cfg["essential_death"])
    path = os.path.join(out_dir, cfg["output"] + ".json")
    diagrams_to_json(diagrams, path)
    return {"diagrams": path,
            "pairs": {str(d.dim): len(d) for d in diagrams}}


DIST_SCHEMA = {
    "d1": None,
    "d2": None,
    "dim": 1,
    "metric": "bottleneck",
    "p": 1.0,
    "include_essential": False,
}


def cmd_dist(config, out_dir):
    cfg = experiments.check_config(config, DIST_SCHEMA, "dist")

    def pick(path):
        for d in diagrams_from_json(path):
            if d.dim == int(cfg["dim"]):
                return d
        raise DataError(f"{path}: no diagram of dimension {cfg['dim']}")

    d1, d2 = pick(cfg["d1"]), pick(cfg["d2"])
    if cfg["metric"] == "bottleneck":
        value = bottleneck(d1, d2, include_essential=bool(cfg["include_essential"]))
    elif cfg["metric"] == "wasserstein":
        value = wasserstein(d1, d2, p=float(cfg["p"]),
                            include_essential=bool(cfg["include_essential"]))
    else:
        raise ConfigError(f"unknown metric {cfg['metric']!r}")
    result = {"metric": cfg["metric"], "dim": int(cfg["dim"]), "value": value}
    experiments.write_json(os.path.join(out_dir, "distance.json"), result)
    return result


PIMG_SCHEMA = {
    "diagrams": None,
    "dim": 1,
    "resolution": [20, 20],
    "bandwidth": 0.015,
    "weight": "linear",
    "birth_range": [],
    "pers_range": [],
    "include_essential": True,
    "output": "image",
}


def cmd_pimg(config, out_dir):
    cfg = experiments.check_config(config, PIMG_SCHEMA, "pimg")
    dgms = [d for d in diagrams_from_json(cfg["diagrams"]) if d.dim == int(cfg["dim"])]
    if not dgms:
        raise DataError(f"{cfg['diagrams']}: no diagram of dimension {cfg['dim']}")
    imager = PersistenceImager(
        resolution=tuple(cfg["resolution"]),
        bandwidth=float(cfg["bandwidth"]),
        weight=cfg["weight"],
        birth_range=tuple(cfg["birth_range"]) or None,
        pers_range=tuple(cfg["pers_range"]) or None,
        include_essential=bool(cfg["include_essential"]),
    ).fit(dgms)
    image = imager.image(dgms[0])
    path = os.path.join(out_dir, cfg["output"] + ".csv")
    image_to_csv(image, path)
    return {"image": path, "total_mass": float(image.sum())}


def _plot_experiment(name, out_dir):
    """Optional SVG plots; plotting never affects the result files."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    if name == "bottleneck-sim":
        rows = np.loadtxt(os.path.join(out_dir, "bottleneck_sim.csv"),
                          delimiter=",", skiprows=1, ndmin=2)
        ax.boxplot([rows[:, 1], rows[:, 2]], tick_labels=["robust", "kde"])
        ax.set_ylabel("bottleneck distance to clean diagram")
    elif name == "confband":
        rows = np.loadtxt(os.path.join(out_dir, "confband.csv"),
                          delimiter=",", skiprows=1, ndmin=2)
        for p in np.unique(rows[:, 0]):
            sel = rows[rows[:, 0] == p]
            ax.loglog(sel[:, 1], sel[:, 3], marker="o", label=f"p={p:g}")
        ax.set_xlabel("n")
        ax.set_ylabel("confidence radius")
        ax.legend()
    else:
        path = {
            "influence-sim": "influence_sim.csv",
            "circles-sim": "circles_sim.csv",
            "shape-classify": "shape_classify.csv",
        }[name]
        with open(os.path.join(out_dir, path)) as fh:
            header = fh.readline().strip().split(",")
            raw = [line.strip().split(",") for line in fh if line.strip()]
        if name == "influence-sim":
            sel = [(float(r[0]), r[1], float(r[4])) for r in raw
                   if r[2] == "w_inf" and r[3] == "1"]
            for est in sorted({s[1] for s in sel}):
                xs = sorted({s[0] for s in sel if s[1] == est})
                ys = [np.mean([s[2] for s in sel if s[1] == est and s[0] == x])
                      for x in xs]
                ax.plot(xs, ys, marker="o", label=est)
            ax.set_xlabel("outlier distance r")
            ax.set_ylabel("H1 bottleneck influence")
        else:
            metric = header[-1]
            sel = [(r[0], float(r[1]), float(r[3])) for r in raw]
            for est in sorted({s[0] for s in sel}):
                xs = sorted({s[1] for s in sel if s[0] == est})
                ys = [np.mean([s[2] for s in sel if s[0] == est and s[1] == x])
                      for x in xs]
                ax.plot(xs, ys, marker="o", label=est)
            ax.set_xlabel("image bandwidth h")
            ax.set_ylabel(metric)
        ax.legend()
    fig.tight_layout()
    path = os.path.join(out_dir, f"{name}.svg")
    fig.savefig(path)
    plt.close(fig)
    return path


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tdarobust",
        description="Robust persistence diagrams: estimators, metrics, experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--header", action="store_true",
                       help="skip one header line in CSV inputs")

    for name, desc in (("density", "fit an estimator and sample it on a grid"),
                       ("pd", "persistence diagrams of a field or dataset"),
                       ("dist", "distance between two stored diagrams"),
                       ("pimg", "persistence image of a stored diagram")):
        p = sub.add_parser(name, help=desc)
        common(p)

    p = sub.add_parser("experiment", help="run a named experiment pipeline")
    p.add_argument("name", choices=experiments.EXPERIMENTS)
    common(p)
    p.add_argument("--svg", action="store_true", help="emit an SVG plot")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        if args.command == "density":
            result = cmd_density(config, args.out, header=args.header)
        elif args.command == "pd":
            result = cmd_pd(config, args.out, header=args.header)
        elif args.command == "dist":
            result = cmd_dist(config, args.out)
        elif args.command == "pimg":
            result = cmd_pimg(config, args.out)
        else:
            result = experiments.run_experiment(args.name, config, args.out,
                                                seed=args.seed)
            if args.svg:
                result = dict(result)
                result["plot"] = _plot_experiment(args.name, args.out)
        json.dump(result, sys.stdout, indent=2, sort_keys=True, default=str)
        sys.stdout.write("\n")
        return 0
    except (ConfigError, ParameterError) as exc:
        _fail("config", exc)
        return 2
    except DataError as exc:
        _fail("data", exc)
        return 3
    except (NumericError, FloatingPointError) as exc:
        _fail("numeric", exc)
        return 4


def _fail(kind, exc):
    json.dump({"error": kind, "message": str(exc)}, sys.stderr)
    sys.stderr.write("\n")


if __name__ == "__main__":
    sys.exit(main())
