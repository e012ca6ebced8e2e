"""Persistent homology of scalar fields on regular grids.

Cubical filtration with the top-cell construction: each sample is a
top-dimensional cell entering at its own value, and every lower face
enters with the first of its incident cells. For a superlevel sweep
(threshold descending from +inf) the filtered complex at level t is the
union of the closed cells of all samples with value >= t, so two
samples are connected exactly when they are king-move (Moore)
adjacent. This construction keeps the discretization error of circular
ridges near half a grid spacing, roughly half of what axis-only
adjacency yields.

H0 comes from a union-find sweep with the elder rule in any grid
dimension; H1 (2-d grids only) from Z/2 column reduction of the
cell-over-edge boundary matrix.

Internally everything runs in an ascending frame; a superlevel field is
processed through its negation and the pairs are mirrored back, which
realizes the (l, u) = (death, birth) convention exactly.

Tie-breaking is deterministic: equal sample values are ordered by
linearized (row-major) index.
"""

from itertools import product

import numpy as np

from .diagrams import PersistenceDiagram
from .errors import ParameterError
from .grids import SUPERLEVEL

ESSENTIAL_AUTO = "auto"
ESSENTIAL_EXTREME = "extreme"


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def _h0_sweep_ascending(values, shape):
    """Union-find sweep in ascending order over Moore-adjacent samples.

    Returns (pairs, essential_birth) in the ascending frame, where each
    pair is (birth value, death value) with birth < death; zero
    persistence pairs are dropped. The surviving root is always the
    elder component (smaller (value, index) birth key).
    """
    flat = np.asarray(values, dtype=float).ravel(order="C")
    n = flat.size
    order = np.lexsort((np.arange(n), flat))
    dims = len(shape)
    coords = np.array(np.unravel_index(np.arange(n), shape))  # (d, n)
    strides = np.empty(dims, dtype=np.int64)
    acc = 1
    for a in range(dims - 1, -1, -1):
        strides[a] = acc
        acc *= shape[a]
    offsets = [off for off in product((-1, 0, 1), repeat=dims) if any(off)]
    deltas = [int(np.dot(off, strides)) for off in offsets]

    parent = np.full(n, -1, dtype=np.int64)
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)

    pairs = []
    for v in order:
        value = flat[v]
        roots = set()
        for off, delta in zip(offsets, deltas):
            ok = True
            for a in range(dims):
                c = coords[a, v] + off[a]
                if c < 0 or c >= shape[a]:
                    ok = False
                    break
            if not ok:
                continue
            u = v + delta
            if parent[u] != -1:
                roots.add(_find(parent, u))
        if not roots:
            parent[v] = v
            continue
        elder = min(roots, key=lambda r: pos[r])
        parent[v] = elder
        for r in roots:
            if r == elder:
                continue
            if flat[r] != value:
                pairs.append((float(flat[r]), float(value)))
            parent[r] = elder
    essential_birth = float(flat[order[0]])
    return pairs, essential_birth


def _h1_pairs_ascending(values2d):
    """(birth, death) H1 pairs of a 2-d field in the ascending frame.

    Standard persistence pairing: reduce each top-cell column over Z/2
    against the edge rows in filtration order; the pivot edge is the
    birth, the cell the death. Edges carry the min of their (up to two)
    incident cells. Every cell pairs (the filled grid is contractible,
    so no essential 1-cycles exist) and zero-persistence pairs are
    dropped.
    """
    v = np.asarray(values2d, dtype=float)
    rows, cols = v.shape

    # edges between horizontal neighbors, (r, c-1)|(r, c) for c in 0..cols
    side = np.empty((rows, cols + 1))
    side[:, 0] = v[:, 0]
    side[:, -1] = v[:, -1]
    side[:, 1:-1] = np.minimum(v[:, :-1], v[:, 1:])
    # edges between vertical neighbors, (r-1, c)/(r, c) for r in 0..rows
    flat_e = np.empty((rows + 1, cols))
    flat_e[0] = v[0]
    flat_e[-1] = v[-1]
    flat_e[1:-1] = np.minimum(v[:-1, :], v[1:, :])

    n_side = side.size
    edge_vals = np.concatenate([side.ravel(), flat_e.ravel()])
    n_edges = edge_vals.size

    edge_order = np.lexsort((np.arange(n_edges), edge_vals))
    edge_rank = np.empty(n_edges, dtype=np.int64)
    edge_rank[edge_order] = np.arange(n_edges)
    rank_val = edge_vals[edge_order]

    cell_vals = v.ravel()
    n_cells = cell_vals.size
    cell_order = np.lexsort((np.arange(n_cells), cell_vals))

    cr, cc = np.divmod(np.arange(n_cells), cols)
    left = cr * (cols + 1) + cc
    right = cr * (cols + 1) + cc + 1
    top = n_side + cr * cols + cc
    bottom = n_side + (cr + 1) * cols + cc
    boundary = edge_rank[np.stack([left, right, top, bottom], axis=1)]

    pivot = {}
    pairs = []
    for s in cell_order:
        col = frozenset(boundary[s])
        while col:
            low = max(col)
            other = pivot.get(low)
            if other is None:
                pivot[low] = col
                birth = float(rank_val[low])
                death = float(cell_vals[s])
                if birth != death:
                    pairs.append((birth, death))
                break
            col = col.symmetric_difference(other)
    return pairs


def _essential_pair(values, direction, nonneg, essential_death):
    vmin = float(values.min())
    vmax = float(values.max())
    if direction == SUPERLEVEL:
        upper = vmax
        lower = 0.0 if (essential_death == ESSENTIAL_AUTO and nonneg) else vmin
    else:
        lower = vmin
        nonpos = bool(values.max() <= 0.0)
        upper = 0.0 if (essential_death == ESSENTIAL_AUTO and nonpos) else vmax
    return lower, upper


def _check_request(field, max_dim):
    d = field.grid.dim
    if max_dim is None:
        max_dim = 1 if d == 2 else 0
    max_dim = int(max_dim)
    if max_dim < 0:
        raise ParameterError("max_dim must be nonnegative")
    if max_dim >= 1 and d != 2:
        raise ParameterError(f"H{max_dim} is only supported on 2-d grids (got d={d})")
    if max_dim > 1:
        raise ParameterError("homology dimensions above 1 are not supported")
    return max_dim


def persistence(field, max_dim=None, essential_death=ESSENTIAL_AUTO):
    """Persistence diagrams of a grid field, one per homology dimension.

    Superlevel fields sweep the threshold downward from +inf; sublevel
    fields mirror this. The essential H0 class of a nonnegative
    superlevel field dies at 0 by convention; essential_death="extreme"
    forces the global min (superlevel) / max (sublevel) instead.
    """
    max_dim = _check_request(field, max_dim)
    if essential_death not in (ESSENTIAL_AUTO, ESSENTIAL_EXTREME):
        raise ParameterError(f"bad essential_death {essential_death!r}")
    superlevel = field.direction == SUPERLEVEL
    work = -field.values if superlevel else field.values
    shape = field.grid.shape

    pairs_int, _ = _h0_sweep_ascending(work, shape)
    if superlevel:
        pairs = [(-d, -b) for (b, d) in pairs_int]
    else:
        pairs = list(pairs_int)
    ess_lower, ess_upper = _essential_pair(field.values, field.direction,
                                           field.nonneg, essential_death)
    pairs.append((ess_lower, ess_upper))
    essential = [False] * (len(pairs) - 1) + [True]
    if ess_lower == ess_upper:  # constant zero field: drop the degenerate pair
        pairs.pop()
        essential.pop()
    diagrams = [PersistenceDiagram(0, pairs, essential, field.direction)]

    if max_dim >= 1:
        h1_int = _h1_pairs_ascending(work.reshape(shape))
        if superlevel:
            h1 = [(-d, -b) for (b, d) in h1_int]
        else:
            h1 = h1_int
        diagrams.append(PersistenceDiagram(1, h1, None, field.direction))
    return diagrams


def h0_oracle(field, essential_death=ESSENTIAL_AUTO):
    """Brute-force H0 by flood-filling every distinct threshold.

    Independent of the union-find sweep: thresholds are the distinct
    field values, components come from scipy's n-d labelling with full
    (Moore) connectivity, and merges are tracked across steps. Must
    agree with persistence(field, 0) exactly.
    """
    from scipy import ndimage

    superlevel = field.direction == SUPERLEVEL
    work = -field.values if superlevel else field.values
    shape = field.grid.shape
    arr = work.reshape(shape)
    n = work.size
    order = np.lexsort((np.arange(n), work))
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    structure = ndimage.generate_binary_structure(len(shape), len(shape))

    thresholds = np.unique(work)
    # live components keyed by their birth vertex
    live = {}
    pairs_int = []
    for t in thresholds:
        mask = arr <= t
        labels, _ = ndimage.label(mask, structure=structure)
        labels_flat = labels.ravel()
        active = labels_flat > 0
        # earliest (value, index) position per current label
        min_pos = {}
        for p, lab in zip(pos[active], labels_flat[active]):
            if lab not in min_pos or p < min_pos[lab]:
                min_pos[lab] = p
        # map previous components into current labels
        merged = {}
        for birth_vertex in list(live):
            lab = labels_flat[birth_vertex]
            merged.setdefault(lab, []).append(birth_vertex)
        new_live = {}
        for lab, members in merged.items():
            members.sort(key=lambda bv: pos[bv])
            survivor = members[0]
            new_live[survivor] = live[survivor]
            for dead in members[1:]:
                birth_val = work[dead]
                if birth_val != t:
                    pairs_int.append((float(birth_val), float(t)))
        # brand-new components: labels with no previous member
        for lab, p in min_pos.items():
            if lab not in merged:
                birth_vertex = int(order[p])
                new_live[birth_vertex] = p
        live = new_live

    if superlevel:
        pairs = [(-d, -b) for (b, d) in pairs_int]
    else:
        pairs = list(pairs_int)
    ess_lower, ess_upper = _essential_pair(field.values, field.direction,
                                           field.nonneg, essential_death)
    pairs.append((ess_lower, ess_upper))
    essential = [False] * (len(pairs) - 1) + [True]
    if ess_lower == ess_upper:
        pairs.pop()
        essential.pop()
    return PersistenceDiagram(0, pairs, essential, field.direction)


def h1_rank_oracle(field, threshold):
    """Number of independent loops of the (super/sub)level set at a level.

    The filtered complex is a union of closed squares, so its holes are
    the bounded 4-connected components of the absent samples. Used as
    an independent cross-check of the H1 diagram.
    """
    from scipy import ndimage

    superlevel = field.direction == SUPERLEVEL
    work = -field.values if superlevel else field.values
    t = -float(threshold) if superlevel else float(threshold)
    arr = work.reshape(field.grid.shape)
    if arr.ndim != 2:
        raise ParameterError("h1_rank_oracle needs a 2-d field")
    absent = arr > t
    labels, count = ndimage.label(absent, structure=ndimage.generate_binary_structure(2, 1))
    if count == 0:
        return 0
    border = np.unique(np.concatenate([
        labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]]))
    touching = set(int(b) for b in border if b > 0)
    return int(count - len(touching))
