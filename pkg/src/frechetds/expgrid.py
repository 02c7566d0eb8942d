"""Exponential grids around a point.

Layer ``i`` (``1 <= i <= n_layers``) is the shell between the cubes of
half-side ``c**(i-1) * w`` and ``c**i * w`` around the centre, where
``w = r1 / sqrt(d)``. It is covered by a lattice of width
``w_i = (eps / sqrt(d)) * c**(i-1) * w`` anchored at the centre. In lattice
units every layer is the same integer cube-with-a-hole,
``M0 < |n|_inf <= M``, so ids can be computed arithmetically instead of
storing the points:

* id 0 is the centre itself,
* id ``1 + (i-1) * per_layer + rank(n)`` is lattice point ``n`` of layer
  ``i``, with ``rank`` the lexicographic rank inside the cube-with-hole.
"""

from bisect import bisect_right
import math

import numpy as np

from .errors import InputError, OutOfRange

# guards floor() of ratios that are integers in exact arithmetic
_GUARD = 1e-9
# points within this relative distance outside a cube face count as on it
_SLACK = 1e-12


class ExponentialGrid:
    """Exponential grid around ``center`` covering ``b(center, r2)`` at precision ``eps``.

    Points ``y`` with ``r1 < |y - center| <= r2`` snap to a grid point
    ``z`` with ``|y - z| <= eps * |y - center|``; points within ``r1`` snap
    to the centre.
    """

    def __init__(self, center, r1, r2, eps, c=2):
        self.center = np.asarray(center, dtype=np.float64).reshape(-1)
        if not (0 < r1 < r2) or not math.isfinite(r2):
            raise InputError(f"need 0 < r1 < r2 < inf, got r1={r1}, r2={r2}")
        if not 0 < eps < 1:
            raise InputError(f"eps must lie in (0, 1), got {eps}")
        if c <= 1:
            raise InputError(f"growth constant must exceed 1, got {c}")
        self.r1, self.r2, self.eps, self.c = float(r1), float(r2), float(eps), c
        self.d = d = len(self.center)
        self.w = self.r1 / math.sqrt(d)
        i = max(1, math.ceil(math.log(self.r2 / self.w, c)) - 1)
        while self.bound(i) < self.r2:
            i += 1
        while i > 1 and self.bound(i - 1) >= self.r2:
            i -= 1
        self.n_layers = i
        self.M = math.floor(c * math.sqrt(d) / eps + _GUARD)
        self.M0 = math.floor(math.sqrt(d) / eps + _GUARD)
        self.side = 2 * self.M + 1
        self.hole = 2 * self.M0 + 1
        self.per_layer = self.side**d - self.hole**d
        self.size = 1 + self.n_layers * self.per_layer

    # -- geometry ----------------------------------------------------------
    def bound(self, i):
        """Half-side of the cube bounding layer ``i``."""
        return self.w * self.c**i

    def layer_width(self, i):
        # same operation order as snap_many, so coordinates agree bit for bit
        return (self.eps / math.sqrt(self.d)) * self.w * float(np.power(float(self.c), i - 1))

    def _layers(self, rho):
        # smallest i >= 1 with rho <= bound(i); boundary points go inward
        rho = np.asarray(rho, dtype=np.float64)
        with np.errstate(divide="ignore"):
            i = np.ceil(np.log(np.maximum(rho, 1e-300) / self.w) / math.log(self.c)).astype(np.int64)
        i = np.maximum(i, 1)
        scaled = rho / (1.0 + _SLACK)
        for _ in range(4):
            up = scaled > self.w * np.power(float(self.c), i)
            down = (i > 1) & (scaled <= self.w * np.power(float(self.c), i - 1))
            if not (up.any() or down.any()):
                break
            i = i + up - down
        return i

    # -- ranking inside the cube-with-hole -----------------------------------
    def _rank(self, n):
        n = np.asarray(n, dtype=np.int64)
        M, M0, side, hole = self.M, self.M0, self.side, self.hole
        full = np.zeros(n.shape[:-1], dtype=np.int64)
        before = np.zeros_like(full)
        inside = np.ones(n.shape[:-1], dtype=bool)
        for j in range(self.d):
            p_side = side ** (self.d - 1 - j)
            p_hole = hole ** (self.d - 1 - j)
            full += (n[..., j] + M) * p_side
            before += np.where(inside, np.clip(n[..., j] + M0, 0, hole) * p_hole, 0)
            inside &= np.abs(n[..., j]) <= M0
        return full - before

    def _unrank(self, r):
        # largest prefix value whose lexicographically smallest completion ranks <= r
        n = []
        for j in range(self.d):
            rest = [-self.M] * (self.d - j - 1)
            vals = range(-self.M, self.M + 1)
            k = bisect_right(vals, r, key=lambda v: int(self._rank(n + [v] + rest)))
            n.append(vals[k - 1])
        return n

    # -- ids <-> points --------------------------------------------------------
    def point(self, pid):
        """Coordinates of grid point ``pid``."""
        pid = int(pid)
        if not 0 <= pid < self.size:
            raise InputError(f"grid id {pid} outside [0, {self.size})")
        if pid == 0:
            return self.center.copy()
        layer, r = divmod(pid - 1, self.per_layer)
        n = np.array(self._unrank(r), dtype=np.float64)
        return self.center + n * self.layer_width(layer + 1)

    def layer_of_id(self, pid):
        return 0 if pid == 0 else 1 + (int(pid) - 1) // self.per_layer

    def lattice_cube(self):
        """All lattice vectors of one layer, in rank order, shape ``(per_layer, d)``."""
        axes = np.arange(-self.M, self.M + 1)
        cube = np.stack(np.meshgrid(*([axes] * self.d), indexing="ij"), axis=-1).reshape(-1, self.d)
        return cube[np.max(np.abs(cube), axis=1) > self.M0]

    def all_points(self):
        """Materialise every grid point in id order, shape ``(size, d)``."""
        cube = self.lattice_cube().astype(np.float64)
        out = [self.center[None]]
        for i in range(1, self.n_layers + 1):
            out.append(self.center + cube * self.layer_width(i))
        return np.concatenate(out)

    # -- snapping ------------------------------------------------------------
    def snap_many(self, Y, clamp=False):
        """Snap each row of ``Y``; returns ``(ids, points, clamped)``.

        Points beyond the outermost layer raise :class:`OutOfRange` unless
        ``clamp`` is set, in which case they are snapped within the outermost
        layer and flagged in ``clamped``.
        """
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        diff = Y - self.center
        rho = np.max(np.abs(diff), axis=1)
        at_centre = np.linalg.norm(diff, axis=1) <= self.r1
        layer = self._layers(rho)
        clamped = (layer > self.n_layers) & ~at_centre
        if clamped.any() and not clamp:
            raise OutOfRange(f"{int(clamped.sum())} point(s) beyond the outermost layer")
        layer = np.minimum(layer, self.n_layers)
        wi = (self.eps / math.sqrt(self.d)) * self.w * np.power(float(self.c), layer - 1)
        t = diff / wi[:, None]
        n = np.clip(np.ceil(t - 0.5), -self.M, self.M).astype(np.int64)  # ties toward -inf
        in_hole = np.max(np.abs(n), axis=1) <= self.M0
        if in_hole.any():
            rows = np.flatnonzero(in_hole)
            j = np.argmax(np.abs(t[rows]), axis=1)
            sgn = np.where(t[rows, j] < 0, -1, 1)
            n[rows, j] = sgn * (self.M0 + 1)
        ids = 1 + (layer - 1) * self.per_layer + self._rank(n)
        pts = self.center + n * wi[:, None]
        ids[at_centre] = 0
        pts[at_centre] = self.center
        return ids, pts, clamped

    def snap(self, y, clamp=False):
        """Snap a single point; returns ``(id, point)``."""
        ids, pts, _ = self.snap_many(np.asarray(y, dtype=np.float64)[None], clamp=clamp)
        return int(ids[0]), pts[0]

    # -- serialisation -------------------------------------------------------
    def to_dict(self):
        return {"center": self.center.tolist(), "r1": self.r1, "r2": self.r2, "eps": self.eps, "c": self.c}

    @classmethod
    def from_dict(cls, data):
        return cls(data["center"], data["r1"], data["r2"], data["eps"], data.get("c", 2))

    def __repr__(self):
        return (
            f"ExponentialGrid(d={self.d}, layers={self.n_layers}, M={self.M}, M0={self.M0}, "
            f"size={self.size})"
        )


def enumerate_layer_brute_force(grid, i):
    """Independent scan of layer ``i``: every lattice point inside the layer shell.

    Works purely geometrically (no ``M``/``M0``); used to cross-check counts.
    """
    wi = grid.layer_width(i)
    lo, hi = grid.bound(i - 1), grid.bound(i)
    B = int(math.ceil(hi / wi)) + 1
    axes = np.arange(-B, B + 1)
    cube = np.stack(np.meshgrid(*([axes] * grid.d), indexing="ij"), axis=-1).reshape(-1, grid.d)
    rho = np.max(np.abs(cube * wi), axis=1)
    return cube[(rho > lo) & (rho <= hi)]
