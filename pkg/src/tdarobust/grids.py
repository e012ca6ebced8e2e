"""Regular evaluation grids and scalar fields sampled on them.

A ScalarField is the bridge between the density estimators and the
persistence machinery: filter-function values on the vertices of an
axis-aligned grid, stored row-major (C order), tagged with the
filtration direction the values are meant for.
"""

import json
import os

import numpy as np

from .errors import DataError, ParameterError

SUPERLEVEL = "superlevel"
SUBLEVEL = "sublevel"


class GridSpec:
    """Axis-aligned box with a vertex count per axis (>= 2 each)."""

    def __init__(self, lower, upper, resolution):
        self.lower = np.atleast_1d(np.asarray(lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(upper, dtype=float))
        self.resolution = np.atleast_1d(np.asarray(resolution, dtype=int))
        if not (self.lower.shape == self.upper.shape == self.resolution.shape):
            raise ParameterError("grid lower/upper/resolution must share a length")
        if np.any(self.upper <= self.lower):
            raise ParameterError("grid upper corner must exceed lower corner")
        if np.any(self.resolution < 2):
            raise ParameterError("grid needs at least 2 vertices per axis")

    @property
    def dim(self):
        return self.lower.size

    @property
    def shape(self):
        return tuple(int(r) for r in self.resolution)

    @property
    def size(self):
        return int(np.prod(self.resolution))

    @property
    def spacing(self):
        return (self.upper - self.lower) / (self.resolution - 1)

    def axes(self):
        return [np.linspace(self.lower[i], self.upper[i], self.resolution[i])
                for i in range(self.dim)]

    def vertices(self):
        """All grid vertices as an (n, d) array in row-major vertex order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel(order="C") for m in mesh], axis=1)

    def contains(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return bool(np.all(points >= self.lower) and np.all(points <= self.upper))

    def params(self):
        return {
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "resolution": self.resolution.tolist(),
        }


def grid_from_config(config):
    if isinstance(config, GridSpec):
        return config
    if not isinstance(config, dict):
        raise ParameterError(f"grid config must be a mapping, got {config!r}")
    missing = {"lower", "upper", "resolution"} - set(config)
    if missing:
        raise ParameterError(f"grid config missing keys: {sorted(missing)}")
    return GridSpec(config["lower"], config["upper"], config["resolution"])


def cover_grid(points, resolution, margin=3.0, sigma=None):
    """Grid spanning the bounding box of `points` with a margin.

    The margin is `margin * sigma` when sigma is given, otherwise a
    fraction of the box diagonal.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    if sigma is not None:
        pad = margin * float(sigma)
    else:
        pad = margin * 0.05 * float(np.linalg.norm(hi - lo) + 1e-12)
    res = np.full(points.shape[1], int(resolution))
    return GridSpec(lo - pad, hi + pad, res)


class ScalarField:
    """Filter-function values on the vertices of a GridSpec."""

    def __init__(self, grid, values, direction=SUPERLEVEL, nonneg=None):
        self.grid = grid
        values = np.asarray(values, dtype=float).ravel(order="C")
        if values.size != grid.size:
            raise ParameterError(
                f"value count {values.size} does not match grid size {grid.size}"
            )
        if not np.all(np.isfinite(values)):
            raise ParameterError("field values must be finite")
        if direction not in (SUPERLEVEL, SUBLEVEL):
            raise ParameterError(f"direction must be superlevel|sublevel, got {direction!r}")
        self.values = values
        self.direction = direction
        self.nonneg = bool(values.min() >= 0.0) if nonneg is None else bool(nonneg)

    @property
    def shape(self):
        return self.grid.shape

    def reshaped(self):
        return self.values.reshape(self.shape, order="C")

    def negated(self):
        """Mirror field: values negated and the direction tag swapped."""
        direction = SUBLEVEL if self.direction == SUPERLEVEL else SUPERLEVEL
        return ScalarField(self.grid, -self.values, direction=direction)

    def sup_diff(self, other):
        if self.shape != other.shape:
            raise ParameterError("fields live on different grids")
        return float(np.max(np.abs(self.values - other.values)))


def write_field(field, path):
    """CSV of values (one per line, row-major) plus a JSON sidecar."""
    sidecar = {
        "grid": field.grid.params(),
        "direction": field.direction,
        "nonneg": field.nonneg,
    }
    with open(path, "w") as fh:
        for v in field.values:
            fh.write(f"{float(v):.17g}\n")
    with open(_sidecar_path(path), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_field(path):
    side = _sidecar_path(path)
    if not os.path.exists(path) or not os.path.exists(side):
        raise DataError(f"field file or sidecar missing for {path}")
    with open(side) as fh:
        meta = json.load(fh)
    try:
        grid = grid_from_config(meta["grid"])
        direction = meta["direction"]
        nonneg = meta.get("nonneg")
    except (KeyError, ParameterError) as exc:
        raise DataError(f"bad field sidecar {side}: {exc}") from exc
    try:
        values = np.loadtxt(path, ndmin=1)
    except ValueError as exc:
        raise DataError(f"bad field values in {path}: {exc}") from exc
    try:
        return ScalarField(grid, values, direction=direction, nonneg=nonneg)
    except ParameterError as exc:
        raise DataError(str(exc)) from exc


def _sidecar_path(path):
    base, _ = os.path.splitext(path)
    return base + ".json"
