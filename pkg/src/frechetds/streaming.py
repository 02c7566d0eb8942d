"""Merge-and-reduce streaming distance oracle.

The stream is cut into blocks of ``b`` points (default ``k``). Each finished
block gets its own oracle, pushed on a stack; whenever the block counter is
divisible by ``t`` the top ``t`` oracles are merged into one, using a
k-simplification of their concatenation that has been maintained since the
first of those blocks arrived. Queries chain every oracle on the stack
together with the raw points of the unfinished block.

With a known stream length ``m`` the arity is ``t = ceil(m ** (1/s))`` and
every oracle uses ``eps' = eps / (2 s)``, so the compounded error along a
merge tree of height at most ``s`` stays below ``1 + eps``. Without ``m`` the
stream is handled in epochs with doubling length guesses; finished epochs are
frozen and still take part in queries.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .compose import ExactSegment, chain_query, merge_oracles
from .errors import InputError
from .geometry import as_curve
from .oracle import DEFAULT_BUDGET, build_oracle
from .simplify import StreamSimplifier


def arity_for(m, s):
    """Smallest integer ``t >= 2`` with ``t ** s >= m``."""
    if s <= 1:
        raise InputError(f"tradeoff parameter s must exceed 1, got {s}")
    t = max(2, math.ceil(m ** (1.0 / s) - 1e-9))
    while t**s < m:
        t += 1
    while t > 2 and (t - 1) ** s >= m:
        t -= 1
    return t


@dataclass
class StreamConfig:
    """Parameters of a streaming run.

    ``s`` is either a number in ``(1, log2 m]`` or ``"log"`` for ``log2 m``
    (which gives ``t = 2``). Leaving ``m_hint`` unset selects the
    unknown-length mode with first guess ``m0`` (default ``2 * b * t``).
    """

    k: int
    epsilon: float
    s: object = "log"
    m_hint: int = None
    block_size: int = None
    alpha: float = 8
    mode: str = "lazy"
    budget: int = DEFAULT_BUDGET
    m0: int = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InputError(f"k must be a positive integer, got {self.k!r}")
        if not 0 < self.epsilon < 1:
            raise InputError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if self.s != "log" and not (isinstance(self.s, (int, float)) and self.s > 1):
            raise InputError(f"s must be 'log' or a number > 1, got {self.s!r}")
        if self.block_size is None:
            self.block_size = int(self.k)
        if self.block_size < 1:
            raise InputError("block size must be positive")
        if self.m_hint is not None and self.m_hint < 1:
            raise InputError("m_hint must be positive")
        if self.mode not in ("lazy", "eager"):
            raise InputError(f"mode must be 'lazy' or 'eager', got {self.mode!r}")
        if self.m0 is None:
            self.m0 = self._default_m0()
        elif self.m0 < self.block_size or self.m0 % self.block_size:
            raise InputError("m0 must be a positive multiple of the block size")

    @property
    def known_length(self):
        return self.m_hint is not None

    def tradeoff(self, m):
        """``(s, t, eps')`` for a run over ``m`` points."""
        if self.s == "log":
            s = max(1.0, math.log2(m))
            t = 2
        else:
            s = float(self.s)
            t = arity_for(m, s)
        return s, t, self.epsilon / (2 * s)

    def _default_m0(self):
        # m0 = 2 b t with t = t(m0): iterate to the fixed point
        b = self.block_size
        m0 = 4 * b
        for _ in range(64):
            nxt = 2 * b * self.tradeoff(m0)[1]
            if nxt == m0:
                break
            m0 = nxt
        return m0


@dataclass
class StackEntry:
    """Oracle on the stack with the block range it covers and its merge tree."""

    oracle: object
    u: int
    v: int
    height: int
    tree: tuple = field(repr=False)


class MergeReduceRun:
    """One merge-and-reduce pass over a stream segment (``points_read`` counts its own points)."""

    def __init__(self, config, m_guess, offset=0):
        self.config = config
        self.m_guess = m_guess
        self.s, self.t, self.eps_prime = config.tradeoff(m_guess)
        self.b = config.block_size
        self.offset = offset
        self.points_read = 0
        self.buffer = []
        self.stack = []
        self.store = {}
        self.blocks = 0
        self.merge_calls = 0
        self.max_height = 0
        self.frozen = False

    # -- read / process / merge-reduce -----------------------------------------
    def read(self, x):
        if self.frozen:
            raise InputError("run is frozen")
        self.points_read += 1
        l, b, t = self.points_read, self.b, self.t
        i = -(-l // b)
        if l % b == 1 % b and i % t == 1 % t:
            self.store[i] = StreamSimplifier(self.config.k)
        self.buffer.append(x)
        for simp in self.store.values():
            simp.push(x)
        if l % b == 0:
            self._process(i)
            self.buffer = []

    def _leaf(self, points):
        c = self.config
        return build_oracle(np.array(points), c.k, self.eps_prime, alpha=c.alpha, mode=c.mode, budget=c.budget)

    def _process(self, i):
        self.stack.append(StackEntry(self._leaf(self.buffer), i, i, 0, (i, i, ())))
        self.blocks = i
        j = i
        while j % self.t == 0:
            self._merge_reduce()
            j //= self.t

    def _merge_reduce(self):
        c = self.config
        top = self.stack[-self.t :]
        del self.stack[-self.t :]
        u = top[0].u
        merged = merge_oracles(
            [e.oracle for e in top], self.store[u].result(), mode=c.mode, budget=c.budget
        )
        height = 1 + max(e.height for e in top)
        self.stack.append(StackEntry(merged, u, top[-1].v, height, (u, top[-1].v, tuple(e.tree for e in top))))
        for e in top[1:]:
            self.store.pop(e.u, None)
        self.merge_calls += 1
        self.max_height = max(self.max_height, height)

    # -- queries ---------------------------------------------------------------
    def chain(self):
        out = [e.oracle for e in self.stack]
        if self.buffer:
            out.append(ExactSegment(np.array(self.buffer)))
        return out

    def memory_proxy(self):
        """Stored table entries and simplification vertices of live summaries, plus buffered points."""
        entries = sum(e.oracle.table_entries + len(e.oracle.xk) for e in self.stack)
        return entries + sum(len(s) for s in self.store.values()) + len(self.buffer)

    def finalize(self):
        if not self.points_read:
            raise InputError("nothing was read")
        chain = [e.oracle for e in self.stack]
        if self.buffer:
            chain.append(self._leaf(self.buffer))
        if len(chain) == 1:
            return chain[0]
        c = self.config
        return merge_oracles(chain, self.store[1].result(), mode=c.mode, budget=c.budget)


class StreamingOracle:
    """Distance oracle over a growing stream.

    >>> so = StreamingOracle(StreamConfig(k=2, epsilon=0.5, m_hint=100))
    >>> so.extend([[0.0, 0.0], [1.0, 0.0], [2.0, 1.0]]).query([[0.0, 0.0], [2.0, 1.0]])
    1.0
    """

    def __init__(self, config, on_block=None):
        self.config = config
        self.on_block = on_block
        self.dim = None
        guess = config.m_hint if config.known_length else config.m0
        self.runs = [MergeReduceRun(config, guess)]

    @property
    def current(self):
        return self.runs[-1]

    @property
    def archive(self):
        return self.runs[:-1]

    @property
    def points_read(self):
        return sum(r.points_read for r in self.runs)

    def read(self, x):
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if self.dim is None:
            as_curve(x[None])
            self.dim = len(x)
        elif len(x) != self.dim:
            raise InputError(f"point has dimension {len(x)}, stream has {self.dim}")
        elif not np.all(np.isfinite(x)):
            raise InputError("point has non-finite coordinates")
        run = self.current
        if not self.config.known_length and self.points_read == run.m_guess:
            run.frozen = True
            run = MergeReduceRun(self.config, 2 * run.m_guess, offset=self.points_read)
            self.runs.append(run)
        blocks = run.blocks
        run.read(x)
        if self.on_block is not None and run.blocks != blocks:
            self.on_block(run)
        return self

    def extend(self, points):
        for x in np.asarray(points, dtype=np.float64):
            self.read(x)
        return self

    def chain(self):
        out = []
        for r in self.runs:
            out.extend(r.chain())
        return out

    def query(self, q):
        """Estimate ``d(q, stream so far)`` within ``1 + eps``."""
        if not self.points_read:
            raise InputError("query on an empty stream")
        q = as_curve(q, name="query")
        if len(q) > self.config.k:
            raise InputError(f"query has {len(q)} vertices, more than k={self.config.k}")
        if q.shape[1] != self.dim:
            raise InputError(f"query dimension {q.shape[1]} does not match stream dimension {self.dim}")
        return chain_query(self.chain(), q)

    def memory_proxy(self):
        return sum(r.memory_proxy() for r in self.runs)

    def finalize(self):
        """Single static oracle for the whole stream (known-length mode only)."""
        if not self.config.known_length:
            raise InputError("finalize needs a known stream length: epochs share no spanning simplification")
        return self.current.finalize()

    def stats(self):
        r = self.current
        return {
            "points": self.points_read,
            "runs": len(self.runs),
            "t": r.t,
            "s": r.s,
            "eps_prime": r.eps_prime,
            "blocks": r.blocks,
            "stack": len(r.stack),
            "store": len(r.store),
            "merge_calls": sum(x.merge_calls for x in self.runs),
            "max_height": max(x.max_height for x in self.runs),
            "memory_proxy": self.memory_proxy(),
        }


def balanced_tree(u, t, level):
    """Expected merge tree of ``t**level`` blocks starting at block ``u``."""
    if level == 0:
        return (u, u, ())
    w = t ** (level - 1)
    return (u, u + t**level - 1, tuple(balanced_tree(u + j * w, t, level - 1) for j in range(t)))


__all__ = ["StreamConfig", "StreamingOracle", "MergeReduceRun", "StackEntry", "arity_for", "balanced_tree"]
