import json

import numpy as np
import pytest

from frechetds import kernels
from frechetds.errors import BudgetExceeded, InputError
from frechetds.geometry import discrete_frechet, tolerance
from frechetds.oracle import DistanceOracle, build_oracle, estimate_table_size

# the zig-zag family p1 (p2 p3)^t p4 p5 p6 with a short p4-p5 edge
ZIGZAG = np.array([(0, 0), (2, 2), (4, -2), (6, 1), (6.6, 1.0), (9, 0)], dtype=float)


def random_query(rng, X, k):
    L = rng.integers(1, k + 1)
    scale = rng.choice([0.01, 0.3, 1, 5, 50])
    return X[rng.integers(0, len(X), size=L)] + rng.normal(size=(L, X.shape[1])) * scale


def check_sandwich(o, X, q, eps):
    truth = discrete_frechet(q, X)
    est = o.query(q)
    assert truth - tolerance(X, q) <= est <= (1 + eps) * (1 + 1e-9) * truth + tolerance(X, q)
    return est


@pytest.mark.parametrize("k,eps", [(2, 0.5), (3, 0.25), (2, 0.1)])
def test_static_sandwich(k, eps, backend):
    rng = np.random.default_rng(k)
    X = rng.normal(size=(300, 2)).cumsum(axis=0)
    o = build_oracle(X, k, eps)
    for _ in range(150):
        check_sandwich(o, X, random_query(rng, X, k), eps)
    assert o.stats["clamped"] == 0


def test_degenerate_oracle_is_exact():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 1.0], [3.0, 0.0]])
    o = build_oracle(X, 3, 0.5)
    assert o.degenerate and o.dxxk == 0.0 and o.n_points == 0
    rng = np.random.default_rng(0)
    for _ in range(20):
        q = rng.normal(size=(rng.integers(1, 4), 2))
        assert o.query(q) == discrete_frechet(q, X)


def test_simplification_query_returns_anchor():
    X = np.random.default_rng(1).normal(size=(50, 2))
    o = build_oracle(X, 3, 0.5)
    assert o.representative(o.xk) is None
    assert o.query(o.xk) == o.dxxk == discrete_frechet(o.xk, X)


def test_eager_matches_lazy():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(40, 1)).cumsum(axis=0)
    for k, eps in [(1, 0.5), (2, 0.9)]:
        eager = build_oracle(X, k, eps, mode="eager")
        lazy = build_oracle(X, k, eps)
        assert eager.table_entries == eager.table_size_estimate() == estimate_table_size(X, k, eps)
        Q = [random_query(rng, X, k) for _ in range(200)]
        assert [eager.query(q) for q in Q] == [lazy.query(q) for q in Q]
        for q in Q[:60]:
            check_sandwich(eager, X, q, eps)


def test_table_entries_are_exact_distances():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 2)).cumsum(axis=0)
    o = build_oracle(X, 2, 0.5)
    for _ in range(100):
        o.query(random_query(rng, X, 2))
    assert o.table_entries > 0
    for key, v in list(o.table.items())[:50]:
        assert v == discrete_frechet(o.representative_points(key), X)


def test_representative_is_near_query():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(80, 2)).cumsum(axis=0)
    o = build_oracle(X, 2, 0.25)
    for _ in range(100):
        q = random_query(rng, X, 2)
        rep = o.representative(q)
        if rep is None:
            continue
        key, pts = rep
        assert np.array_equal(o.representative_points(key), pts)
        # representatives stay within a small fraction of the query's distance to X
        assert kernels.dfd(np.asarray(o._prepare(q)), pts) <= 0.25 * discrete_frechet(q, X)


def test_query_many_matches_query():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(100, 3))
    o = build_oracle(X, 3, 0.5)
    Q = np.stack([X[rng.integers(0, 100, size=3)] + rng.normal(size=(3, 3)) for _ in range(50)])
    np.testing.assert_array_equal(o.query_many(Q), [o.query(q) for q in Q])
    np.testing.assert_array_equal(o.query_many(Q[:, :2]), [o.query(q[:2]) for q in Q])


def test_proxy_estimate_bounds():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(200, 2)).cumsum(axis=0)
    o = build_oracle(X, 3, 0.5)
    for _ in range(200):
        q = random_query(rng, X, 3)
        truth = discrete_frechet(q, X)
        assert truth - tolerance(X, q) <= o.proxy_estimate(q) <= (2 * o.alpha + 1) * truth + tolerance(X, q)


def test_zigzag_negative_control():
    o = build_oracle(ZIGZAG, 5, 0.05)
    # the simplification keeps one zig-zag and collapses the short edge
    assert len(o.xk) == 5 and o.dxxk > 0
    q = ZIGZAG[[0, 2, 3, 4, 5]] + [[0, 0], [0, 0], [0, 0.8], [0, 0.8], [0, 0]]
    truth = discrete_frechet(q, ZIGZAG)
    assert o.proxy_estimate(q) > 1.05 * truth
    assert truth <= o.query(q) <= 1.05 * truth


@pytest.mark.parametrize("mode", ["lazy", "eager"])
def test_serialisation_roundtrip(mode):
    rng = np.random.default_rng(7)
    X = rng.normal(size=(30, 1)).cumsum(axis=0)
    o = build_oracle(X, 1, 0.5, mode=mode)
    Q = [random_query(rng, X, 1) for _ in range(50)]
    before = [o.query(q) for q in Q]
    data = json.loads(json.dumps(o.to_dict()))
    back = DistanceOracle.from_dict(data)
    assert back.n_points == o.n_points and back.table_entries == o.table_entries
    assert [back.query(q) for q in Q] == before
    # a lazy table without its source answers known keys and refuses new ones
    if mode == "lazy":
        with pytest.raises(InputError):
            back.query(X[:1] + 1e3 * o.lo + 0.123)
        src = DistanceOracle.from_dict(json.loads(json.dumps(o.to_dict(source=X))))
        q = X[:1] + 0.37
        assert src.query(q) == o.query(q)


def test_corrupt_payload_rejected():
    o = build_oracle(np.random.default_rng(8).normal(size=(20, 2)), 2, 0.5)
    data = o.to_dict()
    with pytest.raises(InputError):
        DistanceOracle.from_dict(data | {"format": "other"})
    with pytest.raises(InputError):
        DistanceOracle.from_dict(data | {"n_points": data["n_points"] + 1})


def test_eager_budget():
    X = np.random.default_rng(9).normal(size=(50, 2))
    with pytest.raises(BudgetExceeded) as info:
        build_oracle(X, 3, 0.1, mode="eager", budget=10**6)
    assert info.value.estimate == float(estimate_table_size(X, 3, 0.1)) > 10**6


@pytest.mark.parametrize(
    "kw", [dict(k=0), dict(epsilon=0.0), dict(epsilon=1.0), dict(alpha=4), dict(mode="dense")]
)
def test_invalid_parameters(kw):
    args = dict(k=2, epsilon=0.5) | kw
    with pytest.raises(InputError):
        build_oracle(np.zeros((5, 2)) + np.arange(5)[:, None], **args)


def test_query_shape_errors():
    o = build_oracle(np.random.default_rng(10).normal(size=(20, 2)), 2, 0.5)
    with pytest.raises(InputError):
        o.query(np.zeros((3, 2)))
    with pytest.raises(InputError):
        o.query(np.zeros((1, 3)))
    with pytest.raises(InputError):
        o.query_many(np.zeros((4, 2)))
