"""Shared test helpers: exhaustive matchers and diagram generators.

The brute-force matchers enumerate every partial bijection between two
diagrams (points may also go to the diagonal) and accumulate costs in
the same canonical order as the library, so optimal values compare
exactly.
"""

from itertools import combinations, permutations

import numpy as np
import pytest

from tdarobust import PersistenceDiagram


def _costs(d1, d2, include_essential=False):
    p1 = d1.points(include_essential)
    p2 = d2.points(include_essential)
    n1, n2 = len(p1), len(p2)
    C = np.zeros((max(n1, 1), max(n2, 1)))
    for i in range(n1):
        for j in range(n2):
            C[i, j] = max(abs(p1[i][0] - p2[j][0]), abs(p1[i][1] - p2[j][1]))
    diag1 = [(p[1] - p[0]) / 2 for p in p1]
    diag2 = [(p[1] - p[0]) / 2 for p in p2]
    return n1, n2, C, diag1, diag2


def brute_force_distance(d1, d2, p=None, include_essential=False):
    """Exhaustive bottleneck (p=None) or p-Wasserstein distance."""
    n1, n2, C, diag1, diag2 = _costs(d1, d2, include_essential)
    best = np.inf
    for k in range(0, min(n1, n2) + 1):
        for sub1 in combinations(range(n1), k):
            for sub2 in combinations(range(n2), k):
                for perm in permutations(sub2):
                    match = dict(zip(sub1, perm))
                    used = set(match.values())
                    if p is None:
                        c = 0.0
                        for i in range(n1):
                            c = max(c, C[i, match[i]] if i in match else diag1[i])
                        for j in range(n2):
                            if j not in used:
                                c = max(c, diag2[j])
                    else:
                        c = 0.0
                        for i in range(n1):
                            c += (C[i, match[i]] if i in match else diag1[i]) ** p
                        for j in range(n2):
                            if j not in used:
                                c += diag2[j] ** p
                        c = c ** (1.0 / p)
                    if c < best:
                        best = c
    return best


def random_diagram(rng, n, dim=1, direction="superlevel", span=2.0):
    if n == 0:
        return PersistenceDiagram(dim, np.zeros((0, 2)), None, direction)
    lower = rng.uniform(0.0, span, n)
    upper = lower + rng.uniform(0.01, span, n)
    return PersistenceDiagram(dim, np.column_stack([lower, upper]), None, direction)


def same_diagram(d1, d2):
    return (d1.dim == d2.dim and d1.direction == d2.direction
            and np.array_equal(d1.pairs, d2.pairs)
            and np.array_equal(d1.essential, d2.essential))


@pytest.fixture
def rng():
    return np.random.default_rng(20250809)
