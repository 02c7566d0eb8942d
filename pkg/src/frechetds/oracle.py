"""Sublinear (1+eps)-approximate distance oracle for a single curve.

The oracle keeps a k-simplification ``X_k`` of the input, the distance
``d(X, X_k)`` and, for every query representative (a k-tuple of points from
exponential grids around the vertices of ``X_k``), the distance from that
representative to ``X``. A query is answered from the nearest
representative, so the input curve itself need not be stored.

Tables come in two flavours. *Eager* tables are filled up front for every
representative and stored densely; their size is ``|G|**k`` and is checked
against a budget. *Lazy* tables are dictionaries filled on first use through
a fill function (exact DP against the retained curve for static oracles, a
chain query for merged ones).
"""

import numpy as np

from . import kernels
from .errors import BudgetExceeded, InputError
from .expgrid import ExponentialGrid
from .geometry import as_curve, pad_query
from .simplify import stream_simplify

DEFAULT_BUDGET = 5_000_000
FORMAT = "frechetds.oracle"


def _check_params(k, eps, alpha):
    if int(k) != k or k < 1:
        raise InputError(f"k must be a positive integer, got {k!r}")
    if not 0 < eps < 1:
        raise InputError(f"epsilon must lie in (0, 1), got {eps!r}")
    if alpha < 8:
        raise InputError(f"alpha must be >= 8, got {alpha!r}")


def exact_fill(X):
    """Fill function computing exact distances from representatives to ``X``."""
    X = np.ascontiguousarray(X)

    def fill(reps):
        return kernels.dfd_pairs(reps, X[None])

    return fill


class DistanceOracle:
    """Distance oracle around a fixed simplification.

    Usually built with :func:`build_oracle` (static curve) or
    :func:`frechetds.compose.merge_oracles` (concatenation of oracles).

    Parameters
    ----------
    xk : array (k', d)
        Simplification vertices, ``k' <= k``.
    dxxk : float
        Distance (or upper estimate) between the summarised curve and ``xk``.
    k, eps, alpha : parameters
        Query complexity, precision and simplification quality.
    fill : callable or None
        Maps an ``(N, k, d)`` batch of representatives to their distances.
        ``None`` freezes the table (misses raise).
    mode : {"lazy", "eager"}
    budget : int
        Maximum eager table size.
    """

    def __init__(self, xk, dxxk, k, eps, *, alpha=8, fill=None, mode="lazy", budget=DEFAULT_BUDGET, table=None):
        _check_params(k, eps, alpha)
        if mode not in ("lazy", "eager"):
            raise InputError(f"mode must be 'lazy' or 'eager', got {mode!r}")
        self.xk = as_curve(xk, name="simplification")
        if len(self.xk) > k:
            raise InputError(f"simplification has {len(self.xk)} vertices, more than k={k}")
        self.k, self.eps, self.alpha = int(k), float(eps), alpha
        self.dim = self.xk.shape[1]
        self.dxxk = float(dxxk)
        self.degenerate = self.dxxk == 0.0
        self.mode = mode
        self.budget = budget
        self._fill = fill
        self.lo = eps / (2 * alpha) * self.dxxk
        self.hi = 2 * (alpha + 1) / eps * self.dxxk
        self.stats = {"queries": 0, "fills": 0, "hits": 0, "clamped": 0}
        self.grids = []
        if not self.degenerate:
            eps_g = eps / 2
            r1 = eps_g / alpha * self.dxxk
            for x in self.xk:
                self.grids.append(ExponentialGrid(x, r1, self.hi, eps_g / (alpha + 1)))
        sizes = [g.size for g in self.grids]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.n_points = int(self.offsets[-1])
        if table is not None:
            self.table = table
        elif mode == "eager" and not self.degenerate:
            self.table = self._fill_eager()
        else:
            self.table = {}

    # -- sizes ---------------------------------------------------------------
    def table_size_estimate(self):
        """Number of representatives, ``|G|**k``."""
        return self.n_points**self.k

    @property
    def table_entries(self):
        return int(self.table.size) if isinstance(self.table, np.ndarray) else len(self.table)

    # -- eager fill -------------------------------------------------------------
    def _all_grid_points(self):
        return np.concatenate([g.all_points() for g in self.grids])

    def _fill_eager(self, chunk=1 << 15):
        est = self.table_size_estimate()
        if est > self.budget:
            raise BudgetExceeded("eager representative table", float(est), self.budget)
        if self._fill is None:
            raise InputError("eager table needs a fill function")
        P = self._all_grid_points()
        G, k = self.n_points, self.k
        table = np.empty(est, dtype=np.float64)
        for start in range(0, est, chunk):
            flat = np.arange(start, min(est, start + chunk))
            idx = np.stack(np.unravel_index(flat, (G,) * k), axis=1)
            table[start : start + len(flat)] = self._fill(P[idx])
        self.stats["fills"] += est
        return table

    def representative_points(self, key):
        """Coordinates of the representative with global id tuple ``key``."""
        out = []
        for gid in key:
            c = int(np.searchsorted(self.offsets, gid, side="right")) - 1
            out.append(self.grids[c].point(gid - self.offsets[c]))
        return np.array(out)

    def all_keys(self):
        """Every representative key (only sensible for small grids)."""
        G = self.n_points
        return [tuple(int(v) for v in np.unravel_index(f, (G,) * self.k)) for f in range(G**self.k)]

    # -- snapping -------------------------------------------------------------
    def _snap(self, Q):
        """Representatives for a batch of padded queries ``(N, k, d)``."""
        N, k, d = Q.shape
        flat = Q.reshape(-1, d)
        dists = np.linalg.norm(flat[:, None, :] - self.xk[None], axis=2)
        nearest = np.argmin(dists, axis=1)  # smallest index on ties
        keys = np.empty(len(flat), dtype=np.int64)
        reps = np.empty_like(flat)
        for c in np.unique(nearest):
            rows = np.flatnonzero(nearest == c)
            ids, pts, clamped = self.grids[c].snap_many(flat[rows], clamp=True)
            self.stats["clamped"] += int(clamped.sum())
            keys[rows] = ids + self.offsets[c]
            reps[rows] = pts
        return keys.reshape(N, k), reps.reshape(N, k, d)

    def _lookup(self, keys, reps):
        if isinstance(self.table, np.ndarray):
            G = self.n_points
            flat = np.zeros(len(keys), dtype=np.int64)
            for j in range(self.k):
                flat = flat * G + keys[:, j]
            self.stats["hits"] += len(keys)
            return self.table[flat]
        out = np.empty(len(keys))
        missing = {}
        for i, key in enumerate(map(tuple, keys.tolist())):
            v = self.table.get(key)
            if v is None:
                missing.setdefault(key, []).append(i)
            else:
                out[i] = v
        self.stats["hits"] += len(keys) - sum(map(len, missing.values()))
        if missing:
            if self._fill is None:
                raise InputError("representative not in table and the oracle has no fill source")
            first = [rows[0] for rows in missing.values()]
            vals = self._fill(reps[first])
            self.stats["fills"] += len(first)
            for (key, rows), v in zip(missing.items(), vals):
                v = float(v)
                self.table[key] = v
                out[rows] = v
        return out

    # -- queries ---------------------------------------------------------------
    def _prepare(self, q):
        q = pad_query(q, self.k)
        if q.shape[1] != self.dim:
            raise InputError(f"query dimension {q.shape[1]} does not match oracle dimension {self.dim}")
        return q

    def query(self, q):
        """Approximate ``d(q, X)``: never below it, at most ``(1 + eps)`` times it."""
        return float(self.query_many(self._prepare(q)[None])[0])

    def query_many(self, Q):
        """Vectorised :meth:`query` over an ``(N, L, d)`` batch with ``L <= k``."""
        Q = np.asarray(Q, dtype=np.float64)
        if Q.ndim != 3 or Q.shape[2] != self.dim or not 1 <= Q.shape[1] <= self.k:
            raise InputError(f"query batch must have shape (N, <= {self.k}, {self.dim}), got {Q.shape}")
        if Q.shape[1] < self.k:
            Q = np.concatenate([Q, np.repeat(Q[:, -1:], self.k - Q.shape[1], axis=1)], axis=1)
        Q = np.ascontiguousarray(Q)
        self.stats["queries"] += len(Q)
        dq = kernels.dfd_pairs(Q, self.xk[None])
        out = dq + self.dxxk
        if self.degenerate or not len(Q):
            return out
        mid = (dq > self.lo) & (dq < self.hi)
        if mid.any():
            Qm = Q[mid]
            keys, reps = self._snap(Qm)
            out[mid] = kernels.dfd_pairs(Qm, reps) + self._lookup(keys, reps)
        return out

    def representative(self, q):
        """``(key, points)`` the query would be answered from, or ``None`` for the X_k case."""
        q = self._prepare(q)
        dq = kernels.dfd(q, self.xk)
        if self.degenerate or dq <= self.lo or dq >= self.hi:
            return None
        keys, reps = self._snap(q[None])
        return tuple(int(v) for v in keys[0]), reps[0]

    def proxy_estimate(self, q):
        """Triangle-inequality estimate ``d(q, X_k) + d(X_k, X)``; within ``2*alpha+1`` of the truth."""
        return kernels.dfd(self._prepare(q), self.xk) + self.dxxk

    # -- serialisation --------------------------------------------------------
    def to_dict(self, source=None):
        if isinstance(self.table, np.ndarray):
            table = {"dense": self.table.tolist()}
        else:
            table = {"entries": [[*key, v] for key, v in self.table.items()]}
        out = {
            "format": FORMAT,
            "version": 1,
            "k": self.k,
            "epsilon": self.eps,
            "alpha": self.alpha,
            "mode": self.mode,
            "xk": self.xk.tolist(),
            "dxxk": self.dxxk,
            "grids": [g.to_dict() for g in self.grids],
            "n_points": self.n_points,
            "table": table,
        }
        if source is not None:
            out["source"] = np.asarray(source).tolist()
        return out

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != FORMAT:
            raise InputError("not a serialised distance oracle")
        k = data["k"]
        if "dense" in data["table"]:
            table = np.array(data["table"]["dense"], dtype=np.float64)
        else:
            table = {tuple(int(v) for v in e[:k]): float(e[k]) for e in data["table"]["entries"]}
        fill = exact_fill(as_curve(data["source"])) if "source" in data else None
        o = cls(
            data["xk"], data["dxxk"], k, data["epsilon"], alpha=data["alpha"], fill=fill, mode=data["mode"], table=table
        )
        if o.n_points != data["n_points"]:
            raise InputError("grid metadata does not reproduce the stored grid size")
        return o

    def __repr__(self):
        kind = "degenerate" if self.degenerate else f"|G|={self.n_points}"
        return f"DistanceOracle(k={self.k}, eps={self.eps}, {kind}, mode={self.mode}, entries={self.table_entries})"


def build_oracle(X, k, epsilon, *, alpha=8, mode="lazy", budget=DEFAULT_BUDGET):
    """Build a distance oracle for curve ``X`` answering queries of up to ``k`` vertices.

    The simplification comes from the streaming simplifier (8-approximate).
    Eager mode refuses with :class:`BudgetExceeded` when ``|G|**k`` exceeds
    ``budget``; the exception carries the estimate.
    """
    X = as_curve(X)
    _check_params(k, epsilon, alpha)
    xk = stream_simplify(X, k).vertices
    dxxk = kernels.dfd(X, xk)
    oracle = DistanceOracle(xk, dxxk, k, epsilon, alpha=alpha, fill=exact_fill(X), mode=mode, budget=budget)
    oracle.source = X
    return oracle


def estimate_table_size(X, k, epsilon, *, alpha=8):
    """``|G|**k`` for the oracle :func:`build_oracle` would build, without filling anything."""
    return build_oracle(X, k, epsilon, alpha=alpha, mode="lazy").table_size_estimate()


__all__ = ["DistanceOracle", "build_oracle", "estimate_table_size", "exact_fill", "DEFAULT_BUDGET"]
