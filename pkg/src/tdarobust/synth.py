"""Seedable generators for the experiment geometries, plus CSV ingestion.

All randomness flows through Philox, a counter-based 64-bit generator,
keyed by (seed, stream) so replicates and purposes get independent,
bit-reproducible streams on every platform.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ParameterError
from .validation import as_points, check_in_range, check_positive


def make_rng(seed, stream=0):
    """Philox generator for a (seed, stream) pair."""
    seq = np.random.SeedSequence([int(seed) & (2**64 - 1), int(stream)])
    return np.random.Generator(np.random.Philox(seq))


@dataclass
class Circle:
    center: tuple
    radius: float

    def __post_init__(self):
        self.center = tuple(float(c) for c in self.center)
        if len(self.center) != 2:
            raise ParameterError("circle centers must be 2-d")
        self.radius = check_positive(self.radius, "radius")


@dataclass
class Annulus:
    """Annular region: radii in [radius - width/2, radius + width/2]."""

    radius: float
    width: float
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        self.radius = check_positive(self.radius, "radius")
        self.width = check_positive(self.width, "width")
        if self.width >= 2.0 * self.radius:
            raise ParameterError("annulus width must be below its diameter")
        self.center = tuple(float(c) for c in self.center)


@dataclass
class MixtureSpec:
    """Signal-plus-ambient-noise mixture on a 2-d box.

    signal: list of Circle (uniform on the union, each circle weighted
    by circumference) or an Annulus (area-uniform). pi is the noise
    fraction; round(n * (1 - pi)) points are signal, the rest uniform
    on the box.
    """

    signal: object
    box: tuple = ((-4.0, -4.0), (4.0, 4.0))
    pi: float = 0.0
    n: int = 100
    seed: int = 0
    stream: int = 0
    labels: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.pi = check_in_range(self.pi, "pi", 0.0, 1.0, closed_lo=True)
        self.n = int(self.n)
        if self.n < 1:
            raise ParameterError("n must be positive")
        lo, hi = np.asarray(self.box[0], float), np.asarray(self.box[1], float)
        if lo.shape != (2,) or hi.shape != (2,) or np.any(hi <= lo):
            raise ParameterError("box must be ((lo_x, lo_y), (hi_x, hi_y))")
        if isinstance(self.signal, (list, tuple)):
            if len(self.signal) == 0:
                raise ParameterError("need at least one circle in the signal")
            self.signal = [s if isinstance(s, Circle) else Circle(*s) for s in self.signal]
        elif not isinstance(self.signal, Annulus):
            raise ParameterError(f"unsupported signal {self.signal!r}")


def _sample_circles(circles, count, rng):
    radii = np.array([c.radius for c in circles])
    probs = radii / radii.sum()
    choice = rng.choice(len(circles), size=count, p=probs)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=count)
    centers = np.array([circles[i].center for i in choice])
    r = radii[choice]
    return centers + np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def _sample_annulus(annulus, count, rng):
    r_in = annulus.radius - 0.5 * annulus.width
    r_out = annulus.radius + 0.5 * annulus.width
    u = rng.uniform(0.0, 1.0, size=count)
    r = np.sqrt(r_in**2 + u * (r_out**2 - r_in**2))  # area-uniform
    theta = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return np.asarray(annulus.center) + np.column_stack((r * np.cos(theta),
                                                         r * np.sin(theta)))


def sample(spec):
    """Draw points from a MixtureSpec; returns (points, labels).

    labels[i] is 1 for signal points, 0 for box noise; signal points
    come first. Identical (seed, stream) gives identical output.
    """
    rng = make_rng(spec.seed, spec.stream)
    n_signal = int(np.rint(spec.n * (1.0 - spec.pi)))
    n_noise = spec.n - n_signal
    parts = []
    if n_signal:
        if isinstance(spec.signal, Annulus):
            parts.append(_sample_annulus(spec.signal, n_signal, rng))
        else:
            parts.append(_sample_circles(spec.signal, n_signal, rng))
    if n_noise:
        lo = np.asarray(spec.box[0], float)
        hi = np.asarray(spec.box[1], float)
        parts.append(rng.uniform(lo, hi, size=(n_noise, 2)))
    points = np.vstack(parts)
    labels = np.concatenate([np.ones(n_signal, dtype=int),
                             np.zeros(n_noise, dtype=int)])
    return points, labels


def outlier_ring(r, count=0, seed=0, stream=1, center=(0.0, 0.0)):
    """Points uniform on the circle of radius r about `center`.

    count=0 means "about as many points as the radius", i.e. round(r).
    """
    r = check_positive(r, "r")
    count = int(count)
    if count < 0:
        raise ParameterError("count must be nonnegative")
    if count == 0:
        count = max(1, int(np.rint(r)))
    rng = make_rng(seed, stream)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return np.asarray(center, float) + np.column_stack((r * np.cos(theta),
                                                        r * np.sin(theta)))


def load_point_cloud(path, header=False):
    """Read an (n, d) point cloud from CSV, one point per row."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if header:
        lines = lines[1:]
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=1 + int(header)):
        line = line.strip()
        if not line:
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise DataError(f"{path}:{lineno}: expected {width} columns, got {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-numeric cell ({exc})") from exc
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def save_point_cloud(points, path):
    points = as_points(points)
    with open(path, "w") as fh:
        for row in points:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
