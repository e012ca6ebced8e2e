"""Persistence diagrams: the container type, exact metrics, and images.

Pairs are stored as (lower, upper) with lower < upper regardless of
filtration direction; superlevel features are recorded as
(death, birth). Essential classes carry finite surrogate values and an
essential flag; the metrics exclude them by default because their
terminal value is a plotting convention, not part of the metric
structure.
"""

import json
import warnings

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DataError, ParameterError
from .grids import SUPERLEVEL, SUBLEVEL


class PersistenceDiagram:
    """Multiset of persistence pairs in one homology dimension."""

    def __init__(self, dim, pairs, essential=None, direction=SUPERLEVEL):
        pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
        if essential is None:
            essential = np.zeros(pairs.shape[0], dtype=bool)
        essential = np.asarray(essential, dtype=bool).reshape(-1)
        if essential.shape[0] != pairs.shape[0]:
            raise ParameterError("essential flags must match the number of pairs")
        if pairs.size and np.any(pairs[:, 0] >= pairs[:, 1]):
            raise ParameterError("every pair needs lower < upper")
        if direction not in (SUPERLEVEL, SUBLEVEL):
            raise ParameterError(f"bad direction {direction!r}")
        order = np.lexsort((essential, pairs[:, 1], pairs[:, 0]))
        self.dim = int(dim)
        self.pairs = pairs[order]
        self.essential = essential[order]
        self.direction = direction

    def __len__(self):
        return self.pairs.shape[0]

    def __repr__(self):
        return (f"PersistenceDiagram(dim={self.dim}, n={len(self)}, "
                f"direction={self.direction!r})")

    def persistences(self):
        return self.pairs[:, 1] - self.pairs[:, 0]

    def points(self, include_essential=False):
        if include_essential:
            return self.pairs.copy()
        return self.pairs[~self.essential].copy()

    def mirror(self):
        """Diagram of the negated field: (l, u) -> (-u, -l), direction swapped."""
        direction = SUBLEVEL if self.direction == SUPERLEVEL else SUPERLEVEL
        flipped = np.column_stack((-self.pairs[:, 1], -self.pairs[:, 0]))
        return PersistenceDiagram(self.dim, flipped, self.essential, direction)

    def to_dict(self):
        return {
            "dim": self.dim,
            "direction": self.direction,
            "pairs": [[float(l), float(u), bool(e)]
                      for (l, u), e in zip(self.pairs, self.essential)],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            pairs = [(p[0], p[1]) for p in data["pairs"]]
            essential = [bool(p[2]) for p in data["pairs"]]
            return cls(data["dim"], pairs, essential, data["direction"])
        except (KeyError, IndexError, TypeError) as exc:
            raise DataError(f"bad diagram payload: {exc}") from exc


def diagrams_to_json(diagrams, path=None):
    payload = [d.to_dict() for d in diagrams]
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def diagrams_from_json(path):
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read diagrams from {path}: {exc}") from exc
    if isinstance(payload, dict):
        payload = [payload]
    return [PersistenceDiagram.from_dict(item) for item in payload]


def _check_comparable(d1, d2):
    if d1.dim != d2.dim:
        raise ParameterError(f"dimension mismatch: {d1.dim} vs {d2.dim}")
    if d1.direction != d2.direction:
        raise ParameterError(
            f"direction mismatch: {d1.direction} vs {d2.direction}"
        )


def _augmented_costs(p1, p2):
    """(n1+n2) x (n1+n2) matrix of l-inf transport costs.

    Point i of D1 may match point j of D2 or its own diagonal
    projection (any diagonal slot); diagonal-to-diagonal costs nothing.
    """
    n1, n2 = p1.shape[0], p2.shape[0]
    size = n1 + n2
    cost = np.zeros((size, size))
    if n1 and n2:
        dl = np.abs(p1[:, None, 0] - p2[None, :, 0])
        du = np.abs(p1[:, None, 1] - p2[None, :, 1])
        cost[:n1, :n2] = np.maximum(dl, du)
    diag1 = 0.5 * (p1[:, 1] - p1[:, 0]) if n1 else np.zeros(0)
    diag2 = 0.5 * (p2[:, 1] - p2[:, 0]) if n2 else np.zeros(0)
    cost[:n1, n2:] = diag1[:, None]
    cost[n1:, :n2] = diag2[None, :]
    return cost


def _hopcroft_karp(adjacency, n_left, n_right):
    """Maximum bipartite matching size (BFS/DFS phases)."""
    INF = float("inf")
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    dist = [0.0] * n_left

    def bfs():
        queue = []
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0.0
                queue.append(u)
            else:
                dist[u] = INF
        found = False
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            for v in adjacency[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(u):
        for v in adjacency[u]:
            w = match_r[v]
            if w == -1 or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = INF
        return False

    size = 0
    while bfs():
        for u in range(n_left):
            if match_l[u] == -1 and dfs(u):
                size += 1
    return size


def bottleneck(d1, d2, include_essential=False):
    """Exact bottleneck distance between two diagrams.

    Binary search over the candidate costs (all matrix entries) with a
    maximum-matching feasibility test at each threshold.
    """
    _check_comparable(d1, d2)
    p1 = d1.points(include_essential)
    p2 = d2.points(include_essential)
    n1, n2 = p1.shape[0], p2.shape[0]
    size = n1 + n2
    if size == 0:
        return 0.0
    cost = _augmented_costs(p1, p2)
    candidates = np.unique(cost)

    def feasible(threshold):
        adjacency = [np.nonzero(cost[u] <= threshold)[0].tolist() for u in range(size)]
        return _hopcroft_karp(adjacency, size, size) == size

    lo, hi = 0, candidates.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def wasserstein(d1, d2, p=1.0, include_essential=False):
    """Exact p-Wasserstein distance via optimal assignment.

    Costs are l-inf displacements raised to the p-th power on the
    augmented matrix; the result is the p-th root of the optimum.
    """
    _check_comparable(d1, d2)
    p = float(p)
    if not np.isfinite(p) or p < 1.0:
        raise ParameterError(f"wasserstein order must satisfy p >= 1, got {p}")
    p1 = d1.points(include_essential)
    p2 = d2.points(include_essential)
    n1, n2 = p1.shape[0], p2.shape[0]
    if n1 == 0 and n2 == 0:
        return 0.0
    cost = _augmented_costs(p1, p2)
    rows, cols = linear_sum_assignment(cost ** p)
    # re-accumulate in canonical order (D1 points ascending, then unmatched
    # D2 points ascending) so the value is reproducible bit for bit
    matched = {}
    for r, c in zip(rows, cols):
        if r < n1 and c < n2:
            matched[r] = c
    total = 0.0
    for i in range(n1):
        if i in matched:
            total += cost[i, matched[i]] ** p
        else:
            total += (0.5 * (p1[i, 1] - p1[i, 0])) ** p
    used = set(matched.values())
    for j in range(n2):
        if j not in used:
            total += (0.5 * (p2[j, 1] - p2[j, 0])) ** p
    return float(total ** (1.0 / p))


def total_persistence(diagram, p=1.0, include_essential=True):
    """Degree-p total persistence (sum of |u - l|^p)^(1/p)."""
    p = float(p)
    if p < 1.0:
        raise ParameterError(f"p must be >= 1, got {p}")
    pts = diagram.points(include_essential)
    if pts.shape[0] == 0:
        return 0.0
    return float(np.sum((pts[:, 1] - pts[:, 0]) ** p) ** (1.0 / p))


def normalize_max_persistence(diagram):
    """Rescale both coordinates so the maximum persistence equals one."""
    if len(diagram) == 0:
        warnings.warn("normalizing an empty diagram is the identity")
        return PersistenceDiagram(diagram.dim, diagram.pairs,
                                  diagram.essential, diagram.direction)
    scale = float(np.max(diagram.persistences()))
    return PersistenceDiagram(diagram.dim, diagram.pairs / scale,
                              diagram.essential, diagram.direction)
