"""Polygonal curves and the discrete Frechet distance.

A curve is an ``(m, d)`` float64 array of vertices. Everything that
accepts a curve runs it through :func:`as_curve` first.
"""

import math

import numpy as np

from . import kernels
from .errors import InputError

#: relative tolerance used for float comparisons across the package
TOL = 1e-9


def as_curve(points, *, name="curve"):
    """Validate and convert ``points`` to a C-contiguous ``(m, d)`` float array."""
    try:
        arr = np.ascontiguousarray(points, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: not numeric ({exc})") from None
    if arr.ndim == 1 and arr.size:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InputError(f"{name}: expected a non-empty (m, d) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name}: contains NaN or infinite coordinates")
    return arr


def tolerance(*curves):
    """Absolute tolerance scaled to the largest coordinate magnitude."""
    scale = 1.0
    for c in curves:
        if len(c):
            scale = max(scale, float(np.max(np.abs(c))))
    return TOL * scale


def dist(a, b):
    return math.dist(a, b)


def _check_pair(p, q):
    p, q = as_curve(p, name="p"), as_curve(q, name="q")
    if p.shape[1] != q.shape[1]:
        raise InputError(f"dimension mismatch: {p.shape[1]} vs {q.shape[1]}")
    return p, q


def discrete_frechet(p, q):
    """Discrete Frechet distance between two curves (rolling-row DP)."""
    p, q = _check_pair(p, q)
    if len(p) < len(q):
        p, q = q, p
    return kernels.dfd(p, q)


def optimal_traversal(p, q):
    """Return ``(distance, traversal)`` with the traversal as a list of index pairs.

    Uses the full DP table, so memory is ``O(|p| |q|)``.
    """
    p, q = _check_pair(p, q)
    diff = p[:, None, :] - q[None, :, :]
    c = np.einsum("ijk,ijk->ij", diff, diff)
    m, n = c.shape
    ca = np.empty_like(c)
    for i in range(m):
        for j in range(n):
            if i == 0 and j == 0:
                best = 0.0
            elif i == 0:
                best = ca[0, j - 1]
            elif j == 0:
                best = ca[i - 1, 0]
            else:
                best = min(ca[i - 1, j], ca[i, j - 1], ca[i - 1, j - 1])
            ca[i, j] = max(c[i, j], best)
    path = [(m - 1, n - 1)]
    i, j = m - 1, n - 1
    while (i, j) != (0, 0):
        moves = []
        if i and j:
            moves.append((ca[i - 1, j - 1], 0, (i - 1, j - 1)))
        if i:
            moves.append((ca[i - 1, j], 1, (i - 1, j)))
        if j:
            moves.append((ca[i, j - 1], 2, (i, j - 1)))
        i, j = min(moves)[2]
        path.append((i, j))
    path.reverse()
    return math.sqrt(ca[-1, -1]), path


def traversal_cost(p, q, path):
    return max(math.dist(p[i], q[j]) for i, j in path)


def is_traversal(path, m, n):
    if not path or path[0] != (0, 0) or path[-1] != (m - 1, n - 1):
        return False
    return all((i2 - i1, j2 - j1) in ((1, 0), (0, 1), (1, 1)) for (i1, j1), (i2, j2) in zip(path, path[1:]))


def _traversals(m, n):
    # every monotone lattice path from (0, 0) to (m-1, n-1)
    def walk(i, j):
        if (i, j) == (m - 1, n - 1):
            yield ((i, j),)
            return
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            a, b = i + di, j + dj
            if a < m and b < n:
                for rest in walk(a, b):
                    yield ((i, j),) + rest

    return walk(0, 0)


def brute_force_frechet(p, q, *, max_cells=36):
    """Minimise the traversal cost over every traversal explicitly.

    Exponential; intended as a test oracle for ``|p| * |q| <= max_cells``.
    """
    p, q = _check_pair(p, q)
    if len(p) * len(q) > max_cells:
        raise InputError(f"brute force limited to {max_cells} cells, got {len(p) * len(q)}")
    return min(traversal_cost(p, q, t) for t in _traversals(len(p), len(q)))


def pad_query(q, k):
    """Pad a query with copies of its last vertex up to ``k`` vertices.

    Padding never changes Frechet distances, so oracles can assume exactly
    ``k`` query vertices.
    """
    q = as_curve(q, name="query")
    if len(q) > k:
        raise InputError(f"query has {len(q)} vertices, more than k={k}")
    if len(q) == k:
        return q
    return np.vstack([q, np.repeat(q[-1:], k - len(q), axis=0)])


def dedup(curve):
    """Drop consecutive duplicate vertices (distance-preserving)."""
    curve = as_curve(curve)
    keep = np.ones(len(curve), dtype=bool)
    keep[1:] = np.any(curve[1:] != curve[:-1], axis=1)
    return curve[keep]


__all__ = [
    "TOL",
    "as_curve",
    "tolerance",
    "dist",
    "discrete_frechet",
    "optimal_traversal",
    "traversal_cost",
    "is_traversal",
    "brute_force_frechet",
    "pad_query",
    "dedup",
]
