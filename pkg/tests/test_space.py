import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import dist_matrix, path_metric_nx
from quasidisk.errors import DisconnectedError, MetricError, PreconditionError
from quasidisk.space import (audit_triangle, build_space, covering_number, hausdorff_proxy, maximal_net,
                             path_metric, shortest_path)

coords_st = arrays(np.float64, st.tuples(st.integers(3, 30), st.just(2)),
                   elements=st.floats(-10, 10, allow_nan=False), unique=True)


def _distinct(p):
    return len(np.unique(np.round(p, 9), axis=0)) == len(p)


@given(coords_st)
def test_coordinate_distances_match_direct_formula(p):
    if not _distinct(p):
        return
    s = build_space(p)
    np.testing.assert_allclose(s.pairwise(np.arange(s.n)), dist_matrix(p), atol=1e-9)


def test_snowflake_exponent_and_scale():
    x = np.linspace(0, 1, 11)
    s = build_space(x, exponent=0.5)
    assert s.dist(0, 10) == pytest.approx(1.0)
    assert s.dist(0, 1) == pytest.approx(math.sqrt(0.1))
    t = s.rescaled(1e3)
    assert t.dist(0, 1) == pytest.approx(1e3 * math.sqrt(0.1))
    assert t.h == pytest.approx(1e3 * s.h)


@pytest.mark.parametrize("matrix, msg", [
    ([[0, 1], [2, 0]], "asymmetric"),
    ([[0, -1], [-1, 0]], "negative"),
    ([[0, 0], [0, 0]], "zero distance"),
    ([[0, np.inf], [np.inf, 0]], "non-finite"),
    ([[1, 1], [1, 0]], "self-distance"),
])
def test_matrix_validation(matrix, msg):
    with pytest.raises(MetricError, match=msg):
        build_space(matrix=np.array(matrix, dtype=float))


def test_repeated_point_rejected():
    with pytest.raises(MetricError, match="repeated"):
        build_space(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]))


def test_triangle_violation_reported_with_witness():
    d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    with pytest.raises(MetricError, match="triangle"):
        build_space(matrix=d)
    s = build_space(matrix=d, audit=False)
    ok, triple, excess = audit_triangle(s)
    assert not ok and excess == pytest.approx(3.0, rel=1e-6) and set(triple) == {0, 1, 2}


def test_edges_completed_and_disconnected_edges_rejected():
    s = build_space(edges=[(0, 1, 1.0), (1, 2, 2.0)], n=3)
    assert s.dist(0, 2) == 3.0
    with pytest.raises(DisconnectedError):
        build_space(edges=[(0, 1, 1.0)], n=3)


def test_chart_must_be_injective():
    p = np.array([[0.0, 0], [1, 0], [2, 0]])
    with pytest.raises(PreconditionError):
        build_space(p, chart=np.zeros((3, 2)))


@given(coords_st, st.floats(0.5, 8))
def test_maximal_net_is_separated_and_covering(p, eps):
    if not _distinct(p):
        return
    s = build_space(p)
    net = maximal_net(s, eps)
    d = dist_matrix(p)
    m = net.members
    sub = d[np.ix_(m, m)] + np.eye(len(m)) * 1e9
    assert sub.min() >= eps * (1 - 1e-12)
    assert np.all(d[:, m].min(axis=1) < eps)
    assert covering_number(s, np.arange(s.n), eps) == len(m)


def test_hausdorff_proxy_edge_cases():
    s = build_space(np.c_[np.linspace(0, 1, 101), np.zeros(101)])
    assert hausdorff_proxy(s, 1, [], 0.1) == 0.0
    assert hausdorff_proxy(s, 1, np.arange(101), 0.1) == pytest.approx(1.0, rel=0.15)
    with pytest.raises(PreconditionError):
        hausdorff_proxy(s, 1, np.arange(101), 0.001)


@given(coords_st)
def test_path_metric_matches_networkx(p):
    if not _distinct(p):
        return
    s = build_space(p, h=6.0)
    pm = path_metric(s)
    np.testing.assert_allclose(pm.matrix, path_metric_nx(dist_matrix(p), 6.0), atol=1e-9)


def test_path_metric_dominates_metric(disk, disk_pm):
    rng = np.random.default_rng(1)
    src = rng.choice(disk.n, 20, replace=False)
    dp = disk_pm.distances_from(src)
    assert np.all(dp >= disk.cross(src) * (1 - 1e-12))
    L, pair, bad = disk_pm.quasiconvexity_factor(max_sources=40)
    assert bad == 0 and 1.0 <= L < 1.3


def test_shortest_path_with_mask_and_disconnection():
    p = np.c_[np.arange(5.0), np.zeros(5)]
    s = build_space(p, h=1.0)
    assert shortest_path(s.graph, 0, 4) == [0, 1, 2, 3, 4]
    mask = np.array([True, True, False, True, True])
    with pytest.raises(DisconnectedError):
        shortest_path(s.graph, 0, 4, mask=mask)


def test_subspace_and_permutation_preserve_distances(disk):
    rng = np.random.default_rng(0)
    perm = rng.permutation(disk.n)
    q = disk.permuted(perm)
    i, j = 5, 77
    assert q.dist(i, j) == disk.dist(perm[i], perm[j])
    assert disk.canonical_order.shape == (disk.n,)
    np.testing.assert_array_equal(perm[q.canonical_order][:50], disk.canonical_order[:50])
    sub = disk.subspace([3, 9, 27])
    assert sub.dist(0, 2) == disk.dist(3, 27)
