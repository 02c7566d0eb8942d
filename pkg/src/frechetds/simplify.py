"""Curve simplification.

Three simplifiers live here:

* :class:`StreamSimplifier`, a one-pass 8-approximate k-simplifier using
  O(k) memory,
* :func:`gonzalez_simplify`, an offline 2-approximate simplifier that
  grows an interval partitioning one centre at a time,
* :func:`optimal_vertex_simplification`, a brute-force yardstick that
  tries every k-subset of the input vertices.

Indices in interval partitionings are 1-based and inclusive, matching the
usual presentation of these algorithms.
"""

from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from . import kernels
from .errors import BudgetExceeded, InputError
from .geometry import as_curve, dedup


@dataclass(frozen=True)
class KSimplification:
    """Snapshot of a simplifier.

    ``intervals`` index the de-duplicated input (points equal to their
    predecessor are not counted); ``raw_intervals`` index raw stream
    positions. ``scale`` is ``None`` until the first reduction happens,
    in which case the simplification is exact.
    """

    vertices: np.ndarray
    intervals: tuple
    raw_intervals: tuple
    scale: float | None

    @property
    def bound(self):
        """Upper bound on the distance between the prefix and ``vertices``."""
        return 0.0 if self.scale is None else 2.0 * self.scale


@dataclass
class _Vertex:
    point: np.ndarray
    a: int  # de-duplicated index range
    b: int
    ra: int  # raw stream range
    rb: int


class StreamSimplifier:
    """One-pass 8-approximate k-simplification.

    Push points with :meth:`push`; read the current simplification with
    :meth:`result`. The scale is kept as ``base * 2**exp`` so repeated
    doubling stays exact.

    Parameters
    ----------
    k : int
        Maximum number of vertices, ``k >= 1``.
    jump : bool
        If true, a reduction jumps straight to the first doubling that
        removes a vertex instead of doubling one step at a time. Both give
        identical results.
    """

    def __init__(self, k, *, jump=True):
        if int(k) != k or k < 1:
            raise InputError(f"k must be a positive integer, got {k!r}")
        self.k = int(k)
        self.jump = jump
        self.n_raw = 0
        self.n_dedup = 0
        self.verts: list[_Vertex] = []
        self.base = None
        self.exp = 0
        self.dim = None
        self._last = None

    @property
    def initialized(self):
        return self.base is not None

    @property
    def scale(self):
        return None if self.base is None else math.ldexp(self.base, self.exp)

    def push(self, p):
        p = np.array(p, dtype=np.float64).reshape(-1)
        if self.dim is None:
            self.dim = p.shape[0]
        elif p.shape[0] != self.dim:
            raise InputError(f"point has dimension {p.shape[0]}, expected {self.dim}")
        if not np.all(np.isfinite(p)):
            raise InputError("point contains NaN or infinite coordinates")
        self.n_raw += 1
        fresh = self._last is None or np.any(p != self._last)
        self._last = p
        if fresh:
            self.n_dedup += 1
        if not self.initialized:
            self._push_init(p, fresh)
        else:
            self._update(p)
        return self

    def extend(self, points):
        for p in as_curve(points):
            self.push(p)
        return self

    # -- init phase: collect k+1 distinct-from-predecessor points ----------
    def _push_init(self, p, fresh):
        if not fresh:
            self.verts[-1].b = self.n_dedup
            self.verts[-1].rb = self.n_raw
            return
        self.verts.append(_Vertex(p, self.n_dedup, self.n_dedup, self.n_raw, self.n_raw))
        if len(self.verts) == self.k + 1:
            gaps = [math.dist(u.point, v.point) for u, v in zip(self.verts, self.verts[1:])]
            i = min(range(len(gaps)), key=gaps.__getitem__)  # smallest index on ties
            dropped = self.verts.pop(i)
            kept = self.verts[i]
            kept.a, kept.ra = dropped.a, dropped.ra
            self.base, self.exp = gaps[i], 0
            # dropping y_i makes y_{i-1}, y_{i+1} neighbours, possibly closer
            # than the scale; absorb such vertices so neighbours stay >= scale
            self._sweep(self.base, strict=True)

    # -- steady state ------------------------------------------------------
    def _update(self, p):
        ell = self.scale
        last = self.verts[-1]
        if math.dist(p, last.point) <= ell:
            last.b, last.rb = self.n_dedup, self.n_raw
            return
        self.verts.append(_Vertex(p, self.n_dedup, self.n_dedup, self.n_raw, self.n_raw))
        while len(self.verts) == self.k + 1:
            if self.jump:
                self._jump_to_removal()
            self._sweep(2.0 * self.scale)
            self.exp += 1

    def _jump_to_removal(self):
        # doublings that remove nothing only grow the scale; skip them
        g = min(math.dist(u.point, v.point) for u, v in zip(self.verts, self.verts[1:]))
        if g <= 2.0 * self.scale:
            return
        e = max(self.exp, math.ceil(math.log2(g / self.base)) - 2)
        while math.ldexp(self.base, e + 1) < g:
            e += 1
        while e > self.exp and math.ldexp(self.base, e) >= g:
            e -= 1
        self.exp = max(self.exp, e)

    def _sweep(self, radius, strict=False):
        # every vertex within `radius` of the current survivor is absorbed
        out = [self.verts[0]]
        for v in self.verts[1:]:
            s = out[-1]
            g = math.dist(s.point, v.point)
            if g < radius or (g == radius and not strict):
                s.b, s.rb = v.b, v.rb
            else:
                out.append(v)
        self.verts = out

    def result(self):
        if not self.verts:
            raise InputError("simplifier has not seen any point")
        return KSimplification(
            vertices=np.array([v.point for v in self.verts]),
            intervals=tuple((v.a, v.b) for v in self.verts),
            raw_intervals=tuple((v.ra, v.rb) for v in self.verts),
            scale=self.scale,
        )

    def __len__(self):
        return len(self.verts)


def stream_simplify(X, k, *, jump=True):
    """Run :class:`StreamSimplifier` over a whole curve."""
    return StreamSimplifier(k, jump=jump).extend(X).result()


# -- offline 2-approximation -------------------------------------------------


def radius(X, a, b, c):
    """Largest distance from ``X[c]`` to ``X[a..b]`` (1-based, inclusive); 0 if ``a > b``."""
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    if not 1 <= c <= n:
        raise InputError(f"centre index {c} outside [1, {n}]")
    if a > b:
        return 0.0
    if a < 1 or b > n:
        raise InputError(f"interval [{a}, {b}] outside [1, {n}]")
    return float(np.max(np.linalg.norm(X[a - 1 : b] - X[c - 1], axis=1)))


def split(X, a, b, c1, c2, i):
    """Cost of splitting ``[a, b]`` after ``i``: left part to ``c1``, right part to ``c2``."""
    if not a <= i <= b:
        raise InputError(f"split index {i} outside [{a}, {b}]")
    return max(radius(X, a, i, c1), radius(X, i + 1, b, c2))


def _best_split(X, a, b, c1, c2, lo, hi):
    """argmin over i in [lo, hi] of split(a, b, c1, c2, i), smallest index on ties."""
    seg = X[a - 1 : b]
    left = np.maximum.accumulate(np.linalg.norm(seg - X[c1 - 1], axis=1))
    dr = np.linalg.norm(seg - X[c2 - 1], axis=1)
    right = np.zeros(len(seg))
    right[:-1] = np.maximum.accumulate(dr[::-1])[::-1][1:]  # r(i+1, b, c2)
    cost = np.maximum(left, right)[lo - a : hi - a + 1]
    return lo + int(np.argmin(cost))


@dataclass
class GonzalezResult:
    vertices: np.ndarray
    intervals: list  # [(a, b, c)], 1-based
    bound: float
    history: list = field(default_factory=list)  # bound after each iteration


def gonzalez_simplify(X, k_max):
    """Offline 2-approximate simplification with at most ``k_max`` vertices.

    Every interval keeps its centre inside it; the split scans are limited
    to positions that preserve this, which is what the approximation
    argument relies on.
    """
    X = as_curve(X)
    if int(k_max) != k_max or k_max < 1:
        raise InputError(f"k_max must be a positive integer, got {k_max!r}")
    n = len(X)
    parts = [[1, n, 1]]
    radii = [radius(X, 1, n, 1)]
    history = [radii[0]]

    def finish():
        centres = [c for _, _, c in parts]
        # equal consecutive centres add nothing to the curve
        return GonzalezResult(dedup(X[np.array(centres) - 1]), [tuple(p) for p in parts], max(radii), history)

    if k_max == 1 or radii[0] == 0.0:
        return finish()
    b = _best_split(X, 1, n, 1, n, 1, n - 1)
    parts = [[1, b, 1], [b + 1, n, n]]
    radii = [radius(X, 1, b, 1), radius(X, b + 1, n, n)]
    history.append(max(radii))
    for _ in range(3, k_max + 1):
        j = int(np.argmax(radii))
        if radii[j] == 0.0:
            break
        a, b, c = parts[j]
        centres = {p[2] for p in parts}
        if a in centres:
            ik = b
        elif b in centres:
            ik = a
        elif radius(X, a, c, c) > radius(X, c, b, c):
            ik = a
        else:
            ik = b
        assert ik not in centres, "interval of positive radius without a free cutoff"
        if ik == b:
            d, c2 = parts[j + 1][1], parts[j + 1][2]
            a2 = _best_split(X, a, b - 1, c, ik, c, b - 1)
            b2 = _best_split(X, b, d, ik, c2, b, c2 - 1)
            new = [[a, a2, c], [a2 + 1, b2, ik], [b2 + 1, d, c2]]
            lo = j
        else:
            d, c2 = parts[j - 1][0], parts[j - 1][2]
            a2 = _best_split(X, d, a - 1, c2, ik, c2, a - 1)
            b2 = _best_split(X, a, b, ik, c, a, c - 1)
            new = [[d, a2, c2], [a2 + 1, b2, ik], [b2 + 1, b, c]]
            lo = j - 1
        parts[lo : lo + 2] = new
        radii[lo : lo + 2] = [radius(X, *p) for p in new]
        history.append(max(radii))
    return finish()


# -- brute force yardstick ------------------------------------------------------


def optimal_vertex_simplification(X, k, *, max_subsets=4000):
    """Best simplification whose vertices are ``k`` of the input vertices, kept in order.

    Returns ``(vertices, distance)``. Refuses with :class:`BudgetExceeded`
    when ``C(|X|, k)`` exceeds ``max_subsets``.
    """
    X = as_curve(X)
    n = len(X)
    if k < 1:
        raise InputError("k must be >= 1")
    if k >= n:
        return X.copy(), 0.0
    total = math.comb(n, k)
    if total > max_subsets:
        raise BudgetExceeded("vertex subsets", total, max_subsets)
    idx = np.array(list(itertools.combinations(range(n), k)))
    cand = X[idx]
    vals = kernels.dfd_pairs(cand, X[None])
    best = int(np.argmin(vals))
    return cand[best].copy(), float(vals[best])
