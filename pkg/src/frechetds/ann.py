"""Approximate near-neighbour search for curves under the discrete Frechet distance.

Curves are bucketed by the sequence of cells of a shifted grid of side
``delta`` that their vertices visit (consecutive repeats collapsed, curves
visiting more than ``k`` cells dropped). A query is bucketed the same way,
then its vertices are snapped to a fine grid of side ``w = eps / (2 sqrt d)``.
The snapped curve is the *representative*; its answer is some bucket member
within ``r (1 + eps/2)`` of it, or none. Answers are memoised per
representative (lazy), or precomputed for tiny instances (eager).

:class:`AnnIndex` draws the grid shift at random. :class:`DeterministicAnnIndex`
snaps the corpus to a grid of side ``eps'' / sqrt d`` with ``eps'' = eps / 4``
and builds one bucket table for every shift on that grid, so a query that
has a near neighbour is always answered.

:func:`partition` is the random ball-carving partition of a finite metric
space.
"""

from bisect import bisect_left
from dataclasses import dataclass
from itertools import combinations, product
import math

import numpy as np

from . import kernels
from .errors import BudgetExceeded, InputError
from .geometry import as_curve

DEFAULT_BUDGET = 200_000


def cell_key(curve, delta, z, k):
    """Cells of the ``delta`` grid shifted by ``z`` visited by ``curve``.

    Returns ``(t, flat cells padded with 0)`` with ``t`` the number of
    distinct consecutive cells, or ``None`` when ``t > k``. The count keeps
    keys of different lengths apart and makes them totally ordered.
    """
    cells = np.floor((np.asarray(curve) - z) / delta).astype(np.int64)
    keep = np.ones(len(cells), dtype=bool)
    keep[1:] = np.any(cells[1:] != cells[:-1], axis=1)
    cells = cells[keep]
    t, d = cells.shape
    if t > k:
        return None
    flat = np.zeros(k * d, dtype=np.int64)
    flat[: t * d] = cells.ravel()
    return (t, *flat.tolist())


def _pad(q, k):
    return np.concatenate([q, np.repeat(q[-1:], k - len(q), axis=0)]) if len(q) < k else q


class _Buckets:
    """Buckets of one shift ``z`` with their answer tables."""

    def __init__(self, keys_to_members):
        self.keys = sorted(keys_to_members)
        self.members = [keys_to_members[key] for key in self.keys]
        self.answers = [{} for _ in self.keys]

    def find(self, key):
        i = bisect_left(self.keys, key)
        return i if i < len(self.keys) and self.keys[i] == key else None


class _AnnBase:
    def __init__(self, curves, k, epsilon, r):
        if int(k) != k or k < 1:
            raise InputError(f"k must be a positive integer, got {k!r}")
        if not 0 < epsilon < 1:
            raise InputError(f"epsilon must lie in (0, 1), got {epsilon!r}")
        if not r > 0:
            raise InputError(f"radius must be positive, got {r!r}")
        self.curves = [as_curve(c, name=f"curve {i}") for i, c in enumerate(curves)]
        if not self.curves:
            raise InputError("empty corpus")
        dims = {c.shape[1] for c in self.curves}
        if len(dims) != 1:
            raise InputError(f"corpus mixes dimensions {sorted(dims)}")
        self.d = dims.pop()
        self.k, self.eps, self.r = int(k), float(epsilon), float(r)
        self.stats = {"queries": 0, "bucket_misses": 0, "verdicts": 0}

    def _scaled(self, q):
        q = as_curve(q, name="query")
        if len(q) > self.k:
            raise InputError(f"query has {len(q)} vertices, more than k={self.k}")
        if q.shape[1] != self.d:
            raise InputError(f"query dimension {q.shape[1]} does not match corpus dimension {self.d}")
        return q / self.r

    def _verdict(self, rep, members, stored):
        # smallest member index within the acceptance radius of the representative
        self.stats["verdicts"] += 1
        for i in members:
            if kernels.dfd(rep, stored[i]) <= self.accept:
                return i
        return -1

    def _answer(self, buckets, slot, ids, rep, stored):
        table = buckets.answers[slot]
        v = table.get(ids)
        if v is None:
            v = table[ids] = self._verdict(rep, buckets.members[slot], stored)
        return v


class AnnIndex(_AnnBase):
    """Randomly shifted grid index (one shift drawn from ``seed``).

    >>> idx = AnnIndex([[[0.0, 0.0], [3.0, 0.0]]], k=2, epsilon=0.5, seed=1)
    >>> idx.query([[0.0, 0.1], [3.0, 0.1]])
    0
    """

    def __init__(self, curves, k, epsilon, *, r=1.0, seed=None, delta=None, eager=False, budget=DEFAULT_BUDGET):
        super().__init__(curves, k, epsilon, r)
        self.delta = float(4 * self.d * self.k if delta is None else delta)
        self.w = self.eps / (2 * math.sqrt(self.d))
        self.accept = 1 + self.eps / 2
        self.seed = seed
        self.z = float(np.random.default_rng(seed).uniform(0.0, self.delta))
        self.scaled = [c / self.r for c in self.curves]
        groups = {}
        self.keys = []
        for i, c in enumerate(self.scaled):
            key = cell_key(c, self.delta, self.z, self.k)
            self.keys.append(key)
            if key is not None:
                groups.setdefault(key, []).append(i)
        self.buckets = _Buckets(groups)
        if eager:
            self._fill_eager(budget)

    def refined_ids(self, q):
        """Fine-grid ids of the padded query vertices."""
        return tuple(np.floor(_pad(q, self.k) / self.w).astype(np.int64).ravel().tolist())

    def _representatives(self, key):
        # fine-grid cells meeting each coarse cell, per coordinate
        t, flat = key[0], np.array(key[1:]).reshape(self.k, self.d)[: key[0]]
        w, delta, z = self.w, self.delta, self.z
        per_cell = []
        for cell in flat:
            axes = [
                range(math.floor((z + c * delta) / w), math.ceil((z + (c + 1) * delta) / w)) for c in cell
            ]
            per_cell.append(axes)
        # compositions of k into t positive parts: how often each cell repeats
        for cuts in combinations(range(1, self.k), t - 1):
            counts = np.diff([0, *cuts, self.k])
            pools = []
            for axes, m in zip(per_cell, counts):
                pools.extend([axes] * m)
            yield from product(*(product(*axes) for axes in pools))

    def representative_count(self):
        total = 0
        for key in self.buckets.keys:
            t = key[0]
            sizes = []
            for c in np.array(key[1:]).reshape(self.k, self.d)[:t]:
                n = 1
                for ci in c:
                    n *= math.ceil((self.z + (ci + 1) * self.delta) / self.w) - math.floor((self.z + ci * self.delta) / self.w)
                sizes.append(n)
            total += sum(
                math.prod(s**m for s, m in zip(sizes, np.diff([0, *cuts, self.k])))
                for cuts in combinations(range(1, self.k), t - 1)
            )
        return total

    def _fill_eager(self, budget):
        est = self.representative_count()
        if est > budget:
            raise BudgetExceeded("eager answer tables", float(est), budget)
        for slot, key in enumerate(self.buckets.keys):
            for rep_ids in self._representatives(key):
                ids = tuple(v for p in rep_ids for v in p)
                rep = np.array(rep_ids, dtype=np.float64) * self.w
                self._answer(self.buckets, slot, ids, rep, self.scaled)

    def query(self, q):
        """Index of a curve within ``(1 + eps) r`` of ``q``, or ``None``."""
        q = self._scaled(q)
        self.stats["queries"] += 1
        slot = self.buckets.find(cell_key(q, self.delta, self.z, self.k))
        if slot is None:
            self.stats["bucket_misses"] += 1
            return None
        ids = self.refined_ids(q)
        rep = np.array(ids, dtype=np.float64).reshape(self.k, self.d) * self.w
        v = self._answer(self.buckets, slot, ids, rep, self.scaled)
        return None if v < 0 else v

    def table_entries(self):
        return sum(len(a) for a in self.buckets.answers)


class DeterministicAnnIndex(_AnnBase):
    """Shift-sweeping index; no randomness is involved.

    The corpus is rounded to a grid of side ``s0 = eps'' / sqrt d`` and one
    bucket table is built for every shift ``z = j * s0`` in ``[0, delta]``.
    A query returns the first answer found along the sweep.
    """

    def __init__(self, curves, k, epsilon, *, r=1.0, delta=None):
        super().__init__(curves, k, epsilon, r)
        self.eps2 = self.eps / 4
        self.delta = float(4 * self.d * self.k if delta is None else delta)
        self.s0 = self.eps2 / math.sqrt(self.d)
        self.w = self.eps2 / (2 * math.sqrt(self.d))
        self.accept = 1 + self.eps2 / 2
        self.snapped = [np.round(c / self.r / self.s0) * self.s0 for c in self.curves]
        self.shifts = [j * self.s0 for j in range(int(math.floor(self.delta / self.s0 + 1e-9)) + 1)]
        self.tables = []
        for z in self.shifts:
            groups = {}
            for i, c in enumerate(self.snapped):
                key = cell_key(c, self.delta, z, self.k)
                if key is not None:
                    groups.setdefault(key, []).append(i)
            self.tables.append(_Buckets(groups))
        self.last_hits = []

    def query(self, q):
        """Index of a curve within ``(1 + eps) r`` of ``q``, or ``None``."""
        q = self._scaled(q)
        self.stats["queries"] += 1
        ids = tuple(np.floor(_pad(q, self.k) / self.w).astype(np.int64).ravel().tolist())
        rep = np.array(ids, dtype=np.float64).reshape(self.k, self.d) * self.w
        self.last_hits = []
        for z, buckets in zip(self.shifts, self.tables):
            slot = buckets.find(cell_key(q, self.delta, z, self.k))
            self.last_hits.append(slot is not None)
            if slot is None:
                continue
            v = self._answer(buckets, slot, ids, rep, self.snapped)
            if v >= 0:
                return v
        if not any(self.last_hits):
            self.stats["bucket_misses"] += 1
        return None

    def to_dict(self, corpus_ref=None):
        tables = []
        for b in self.tables:
            tables.append(
                {
                    "keys": [list(key) for key in b.keys],
                    "members": b.members,
                    "answers": [sorted([list(ids), v] for ids, v in a.items()) for a in b.answers],
                }
            )
        return {
            "format": "frechetds.ann.deterministic",
            "version": 1,
            "k": self.k,
            "epsilon": self.eps,
            "r": self.r,
            "delta": self.delta,
            "corpus": corpus_ref,
            "tables": tables,
        }

    @classmethod
    def from_dict(cls, data, curves):
        if data.get("format") != "frechetds.ann.deterministic":
            raise InputError("not a serialised deterministic ANN index")
        idx = cls(curves, data["k"], data["epsilon"], r=data["r"], delta=data["delta"])
        if len(data["tables"]) != len(idx.tables):
            raise InputError("serialised index does not match the corpus parameters")
        for b, t in zip(idx.tables, data["tables"]):
            if [list(key) for key in b.keys] != t["keys"] or b.members != t["members"]:
                raise InputError("serialised buckets do not match the corpus")
            b.answers = [{tuple(ids): v for ids, v in a} for a in t["answers"]]
        return idx


# -- random partition -------------------------------------------------------------


@dataclass
class PartitionResult:
    """Outcome of :func:`partition`.

    ``cluster_of[p]`` is the permutation position of the centre whose ball
    first covered point ``p``.
    """

    permutation: np.ndarray
    cluster_of: np.ndarray
    R: float

    def clusters(self):
        """Non-empty clusters in carving order, as arrays of point indices."""
        order = np.unique(self.cluster_of)
        return [np.flatnonzero(self.cluster_of == c) for c in order]


def _distance_rows(X, metric):
    if metric is None:
        X = np.asarray(X, dtype=np.float64)
        return lambda i: np.linalg.norm(X - X[i], axis=1)
    return lambda i: np.array([metric(X[i], y) for y in X])


def partition(X, Delta, seed=None, metric=None):
    """Random partition of a finite point set into clusters of diameter at most ``Delta``.

    ``R`` is drawn first, uniform in ``[Delta/4, Delta/2]``, then the
    permutation, both from ``numpy.random.default_rng(seed)``. Points are
    Euclidean rows unless ``metric(a, b)`` is given.
    """
    if not Delta > 0:
        raise InputError(f"Delta must be positive, got {Delta!r}")
    n = len(X)
    if n == 0:
        raise InputError("cannot partition an empty set")
    rng = np.random.default_rng(seed)
    R = float(rng.uniform(Delta / 4, Delta / 2))
    perm = rng.permutation(n)
    row = _distance_rows(X, metric)
    cluster_of = np.full(n, -1, dtype=np.int64)
    for j, c in enumerate(perm):
        ball = (row(c) <= R) & (cluster_of < 0)
        cluster_of[ball] = j
        if (cluster_of >= 0).all():
            break
    return PartitionResult(perm, cluster_of, R)


__all__ = ["AnnIndex", "DeterministicAnnIndex", "PartitionResult", "cell_key", "partition"]
