"""Persistence images: fixed-size rasters of persistence diagrams.

Each pair (l, u) maps to (birth, persistence) = (l, u - l); an
isotropic Gaussian of width h is dropped at every transformed point,
weighted by a function of the persistence, and integrated per pixel
with the midpoint rule. sklearn transformer interface so images feed
straight into the linear models.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ParameterError
from .validation import check_positive


def _transformed_points(diagram, include_essential):
    pts = diagram.points(include_essential)
    if pts.shape[0] == 0:
        return np.zeros((0, 2))
    return np.column_stack((pts[:, 0], pts[:, 1] - pts[:, 0]))


class PersistenceImager(BaseEstimator, TransformerMixin):
    """Vectorize diagrams as weighted Gaussian rasters.

    Parameters
    ----------
    resolution : (rows, cols)
        Pixel counts for the persistence (rows) and birth (cols) axes.
    bandwidth : float
        Standard deviation of the Gaussian dropped at each point.
    weight : "linear" or "constant"
        "linear" weighs each point by persistence / max persistence of
        the range, so diagonal points contribute nothing.
    birth_range, pers_range : (lo, hi) or None
        Raster box in (birth, persistence) coordinates; fit() computes
        missing ranges from the diagrams with a 3*bandwidth pad.
    include_essential : bool
        Whether essential pairs (finite surrogate values) are rastered.
    """

    def __init__(self, resolution=(20, 20), bandwidth=0.015, weight="linear",
                 birth_range=None, pers_range=None, include_essential=True):
        self.resolution = resolution
        self.bandwidth = bandwidth
        self.weight = weight
        self.birth_range = birth_range
        self.pers_range = pers_range
        self.include_essential = include_essential

    def _resolution(self):
        rows, cols = self.resolution
        rows, cols = int(rows), int(cols)
        if rows < 1 or cols < 1:
            raise ParameterError(f"resolution must be >= 1x1, got {self.resolution}")
        return rows, cols

    def fit(self, diagrams, y=None):
        rows, cols = self._resolution()
        h = check_positive(self.bandwidth, "bandwidth")
        if self.weight not in ("linear", "constant"):
            raise ParameterError(f"weight must be linear|constant, got {self.weight!r}")
        diagrams = self._as_list(diagrams)
        points = [_transformed_points(d, self.include_essential) for d in diagrams]
        stacked = np.vstack(points) if points else np.zeros((0, 2))

        def resolve(given, axis):
            if given is not None:
                lo, hi = float(given[0]), float(given[1])
            elif stacked.shape[0]:
                lo = float(stacked[:, axis].min()) - 3.0 * h
                hi = float(stacked[:, axis].max()) + 3.0 * h
            else:
                lo, hi = 0.0, 1.0
            if axis == 1:
                lo = max(lo, 0.0)  # persistence is nonnegative
            return lo, hi

        self.birth_range_ = resolve(self.birth_range, 0)
        self.pers_range_ = resolve(self.pers_range, 1)
        for name, (lo, hi) in (("birth", self.birth_range_), ("pers", self.pers_range_)):
            if not hi > lo:
                raise ParameterError(f"degenerate {name} range ({lo}, {hi})")
        return self

    def image(self, diagram):
        """Raster one diagram to a (rows, cols) matrix."""
        if not hasattr(self, "birth_range_"):
            self.fit([diagram])
        rows, cols = self._resolution()
        h = float(self.bandwidth)
        b_lo, b_hi = self.birth_range_
        q_lo, q_hi = self.pers_range_
        db = (b_hi - b_lo) / cols
        dq = (q_hi - q_lo) / rows
        b_centers = b_lo + db * (np.arange(cols) + 0.5)
        q_centers = q_lo + dq * (np.arange(rows) + 0.5)
        area = db * dq
        norm = area / (2.0 * np.pi * h * h)

        img = np.zeros((rows, cols))
        pts = _transformed_points(diagram, self.include_essential)
        for b, q in pts:
            if self.weight == "linear":
                w = np.clip(q / q_hi, 0.0, 1.0) if q_hi > 0 else 0.0
            else:
                w = 1.0
            if w == 0.0:
                continue
            gb = np.exp(-0.5 * ((b_centers - b) / h) ** 2)
            gq = np.exp(-0.5 * ((q_centers - q) / h) ** 2)
            img += (w * norm) * np.outer(gq, gb)
        return img

    def transform(self, diagrams):
        """Flattened (row-major) image per diagram, stacked as rows."""
        diagrams = self._as_list(diagrams)
        rows, cols = self._resolution()
        out = np.zeros((len(diagrams), rows * cols))
        for i, d in enumerate(diagrams):
            out[i] = self.image(d).ravel(order="C")
        return out

    @staticmethod
    def _as_list(diagrams):
        if hasattr(diagrams, "pairs"):
            return [diagrams]
        return list(diagrams)


def image_to_csv(image, path):
    image = np.asarray(image, dtype=float)
    with open(path, "w") as fh:
        for row in np.atleast_2d(image):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
