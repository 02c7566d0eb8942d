import math

import numpy as np
import pytest

from frechetds.errors import InputError, OutOfRange
from frechetds.expgrid import ExponentialGrid, enumerate_layer_brute_force

CONFIGS = [(1, 0.5), (2, 0.5), (2, 0.3), (2, 0.1), (3, 0.5), (3, 0.25), (4, 0.5)]


def annulus_samples(rng, g, n):
    """Uniform-radius samples in b(x, r2) minus b(x, r1), random directions."""
    u = rng.normal(size=(n, g.d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    r = rng.uniform(g.r1, g.r2, size=n)
    r[:4] = [g.r2, g.r1 * (1 + 1e-9), g.r2 * 0.999999, g.r2]
    return g.center + u * r[:, None]


def test_layer_count_example():
    g = ExponentialGrid([0.0, 0.0], 1.0, 8.0, 0.5)
    assert math.isclose(g.w, 1 / math.sqrt(2))
    assert g.n_layers == 4 == math.ceil(math.log2(8 * math.sqrt(2)))
    assert g.bound(g.n_layers) >= g.r2


@pytest.mark.parametrize("d,eps", CONFIGS)
def test_cardinality_matches_brute_force(d, eps):
    g = ExponentialGrid(np.full(d, 0.25), 0.3, 9.0, eps)
    total = 1
    for i in range(1, g.n_layers + 1):
        lattice = enumerate_layer_brute_force(g, i)
        assert len(lattice) == g.per_layer
        total += len(lattice)
    assert total == g.size
    # closed form independent of the layer
    assert g.per_layer == (2 * g.M + 1) ** d - (2 * g.M0 + 1) ** d


@pytest.mark.parametrize("d,eps", CONFIGS[:5])
def test_points_lie_in_declared_layer_and_ids_roundtrip(d, eps):
    g = ExponentialGrid(np.full(d, -1.5), 0.3, 5.0, eps)
    P = g.all_points()
    assert len(P) == g.size
    for pid in range(1, g.size, max(1, g.size // 300)):
        i = g.layer_of_id(pid)
        rho = np.max(np.abs(P[pid] - g.center))
        assert g.bound(i - 1) < rho <= g.bound(i) * (1 + 1e-12)
        assert np.array_equal(g.point(pid), P[pid])
    # brute force enumeration produces the same point set in the same order
    for i in (1, g.n_layers):
        lattice = enumerate_layer_brute_force(g, i)
        start = 1 + (i - 1) * g.per_layer
        np.testing.assert_allclose(g.center + lattice * g.layer_width(i), P[start : start + g.per_layer])


@pytest.mark.parametrize("d,eps", CONFIGS)
def test_snap_error_within_eps(d, eps, rng):
    g = ExponentialGrid(rng.normal(size=d), 0.2, 40.0, eps)
    Y = annulus_samples(rng, g, 2000)
    ids, Z, clamped = g.snap_many(Y)
    assert not clamped.any()
    err = np.linalg.norm(Y - Z, axis=1)
    dist = np.linalg.norm(Y - g.center, axis=1)
    assert np.all(err <= eps * dist)
    # within the layer's cell diagonal bound
    layers = (ids - 1) // g.per_layer + 1
    widths = np.array([g.layer_width(i) for i in layers])
    assert np.all(err <= math.sqrt(d) * widths * (1 + 1e-12))
    # ids decode to the snapped points
    for j in range(0, 2000, 97):
        np.testing.assert_allclose(g.point(ids[j]), Z[j], rtol=0, atol=1e-12 * g.r2)


def test_snap_inner_ball_and_grid_points(rng):
    g = ExponentialGrid([0.0, 0.0], 1.0, 8.0, 0.5)
    assert g.snap([0.3, -0.4])[0] == 0
    assert np.array_equal(g.snap([0.0, 0.0])[1], g.center)
    P = g.all_points()
    ids, Z, _ = g.snap_many(P)
    far = np.linalg.norm(P, axis=1) > g.r1
    assert np.array_equal(ids[far], np.flatnonzero(far))
    assert np.array_equal(Z[far], P[far])


def test_snap_deterministic_and_tie_rule():
    g = ExponentialGrid([0.0], 1.0, 8.0, 0.5)
    w1 = g.layer_width(1)
    # halfway between lattice points 3 and 4 of layer 1 rounds down
    y = np.array([3.5 * w1])
    pid, z = g.snap(y)
    assert z[0] == 3 * w1
    assert g.snap(y)[0] == pid
    assert g.snap(-y)[1][0] == -4 * w1


def test_out_of_range(rng):
    g = ExponentialGrid([0.0, 0.0], 1.0, 8.0, 0.5)
    far = np.array([[g.bound(g.n_layers) * 1.5, 0.0]])
    with pytest.raises(OutOfRange):
        g.snap_many(far)
    ids, Z, clamped = g.snap_many(far, clamp=True)
    assert clamped[0] and g.layer_of_id(ids[0]) == g.n_layers


def test_size_grows_logarithmically_in_radius_ratio():
    small = ExponentialGrid([0.0, 0.0], 1.0, 10.0, 0.25)
    big = ExponentialGrid([0.0, 0.0], 1.0, 10.0**4, 0.25)
    assert small.per_layer == big.per_layer
    assert big.n_layers <= small.n_layers * 4 + 1


@pytest.mark.parametrize("args", [(1.0, 1.0, 0.5), (2.0, 1.0, 0.5), (1.0, 2.0, 0.0), (1.0, 2.0, 1.0), (0.0, 1.0, 0.5)])
def test_invalid_parameters(args):
    with pytest.raises(InputError):
        ExponentialGrid([0.0], *args)


def test_roundtrip_dict():
    g = ExponentialGrid([1.0, 2.0], 0.5, 7.0, 0.3)
    h = ExponentialGrid.from_dict(g.to_dict())
    assert (h.size, h.M, h.M0, h.n_layers) == (g.size, g.M, g.M0, g.n_layers)
