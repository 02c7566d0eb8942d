"""Queries over concatenations of oracles, and merging oracles into one.

A *chain* is a sequence of elements summarising consecutive pieces of a
curve. Elements are :class:`~frechetds.oracle.DistanceOracle` instances or
:class:`ExactSegment` wrappers around raw points (answered by exact DP).
If every element answers within a factor ``beta``, so does
:func:`chain_query` for the concatenation.
"""

import numpy as np

from . import kernels
from .errors import InputError
from .geometry import as_curve
from .oracle import DEFAULT_BUDGET, DistanceOracle


class ExactSegment:
    """Raw curve piece inside a chain; queries are exact."""

    def __init__(self, points):
        self.points = as_curve(points)
        self.dim = self.points.shape[1]
        self.k = None

    def query(self, q):
        return kernels.dfd(as_curve(q), self.points)

    def query_many(self, Q):
        return kernels.dfd_pairs(np.ascontiguousarray(Q, dtype=np.float64), self.points[None])

    def __len__(self):
        return len(self.points)


def _check_chain(chain):
    chain = list(chain)
    if not chain:
        raise InputError("empty chain")
    dims = {e.dim for e in chain}
    if len(dims) != 1:
        raise InputError(f"chain mixes dimensions {sorted(dims)}")
    ks = {e.k for e in chain if e.k is not None}
    return chain, dims.pop(), min(ks) if ks else None


def _subcurves(Q):
    """All contiguous pieces ``Q[:, s:t]`` padded to full length, plus their (s, t)."""
    N, K, d = Q.shape
    spans = [(s, t) for s in range(K) for t in range(s + 1, K + 1)]
    idx = np.array([[min(s + j, t - 1) for j in range(K)] for s, t in spans])
    return Q[:, idx].reshape(N * len(spans), K, d), spans


def chain_query_many(chain, Q):
    """Estimate ``d(q, X_1 o ... o X_l)`` for each row of ``Q`` (shape ``(N, K, d)``).

    Column ``e`` of the DP holds, for every prefix ``q[:t]``, the estimate
    against ``X_1 o ... o X_e``. Going to ``e + 1`` the prefix is split at
    ``i``, either sharing vertex ``q_i`` between both sides or not.
    """
    chain, dim, k = _check_chain(chain)
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim != 3 or Q.shape[2] != dim:
        raise InputError(f"query batch must have shape (N, K, {dim}), got {Q.shape}")
    N, K, _ = Q.shape
    if k is not None and K > k:
        raise InputError(f"query has {K} vertices, more than k={k}")
    sub, spans = _subcurves(Q)
    V = np.full((N, K + 1, K + 1), np.inf)
    rows = np.arange(N)
    prev = None
    for e, elem in enumerate(chain):
        vals = elem.query_many(sub).reshape(N, len(spans))
        for j, (s, t) in enumerate(spans):
            V[rows, s, t] = vals[:, j]
        cur = np.empty((N, K + 1))
        cur[:, 0] = np.inf
        for t in range(1, K + 1):
            if prev is None:
                cur[:, t] = V[:, 0, t]
                continue
            shared = np.maximum(prev[:, 1 : t + 1], V[:, 0:t, t])  # i = 1..t, right part q[i-1:t]
            best = shared.min(axis=1)
            if t > 1:
                split = np.maximum(prev[:, 1:t], V[:, 1:t, t])  # i = 1..t-1, right part q[i:t]
                best = np.minimum(best, split.min(axis=1))
            cur[:, t] = best
        prev = cur
    return prev[:, K]


def chain_query(chain, q):
    """Single-query version of :func:`chain_query_many`."""
    q = as_curve(q, name="query")
    return float(chain_query_many(chain, q[None])[0])


def merge_oracles(chain, simplification, *, epsilon=None, alpha=None, mode="lazy", budget=DEFAULT_BUDGET):
    """Build one oracle for the concatenation summarised by ``chain``.

    ``simplification`` (vertices, or an object with ``.vertices``) must
    approximate the whole concatenation. Its distance anchor and every
    table entry are chain estimates, so the result answers within
    ``beta**2`` when the chain answers within ``beta``. A lazy result keeps
    the chain as its fill source; an eager one is complete and drops it.
    """
    chain, dim, k = _check_chain(chain)
    oracles = [e for e in chain if isinstance(e, DistanceOracle)]
    if not oracles:
        raise InputError("chain has no oracle to take parameters from")
    params = {(o.k, o.eps, o.alpha) for o in oracles}
    if len(params) != 1:
        raise InputError(f"chain oracles disagree on (k, epsilon, alpha): {sorted(params)}")
    k0, eps0, alpha0 = params.pop()
    xk = as_curve(getattr(simplification, "vertices", simplification), name="simplification")
    if xk.shape[1] != dim:
        raise InputError("simplification dimension does not match the chain")
    anchor = chain_query(chain, xk)
    merged = DistanceOracle(
        xk,
        anchor,
        k0,
        eps0 if epsilon is None else epsilon,
        alpha=alpha0 if alpha is None else alpha,
        fill=lambda reps: chain_query_many(chain, reps),
        mode=mode,
        budget=budget,
    )
    if mode == "eager":
        merged._fill = None
        merged.children = []
    else:
        merged.children = chain
    return merged
