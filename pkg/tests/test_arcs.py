import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import brute_subarc_diam, dist_matrix, minimax_bisect
from quasidisk.arcs import (DiscreteArc, DiscreteLoop, bounded_turning_constant, build_quasiarc,
                            certify_quasiarc, containment_factor, extract_arc, minimax_radius, subarc_diameters)
from quasidisk.errors import PreconditionError
from quasidisk.space import build_space

walk_st = st.lists(st.lists(st.integers(0, 15), min_size=1, max_size=8), min_size=1, max_size=6)


def _chain_segments(raw):
    """Glue raw lists so each segment starts where the previous ended."""
    segs = [raw[0]]
    for s in raw[1:]:
        segs.append([segs[-1][-1]] + s)
    return segs


@given(walk_st)
def test_extract_arc_is_injective_local_and_inside_union(raw):
    segs = _chain_segments(raw)
    arc = extract_arc(segs)
    assert len(set(arc.points.tolist())) == len(arc)
    assert arc.start == segs[0][0] and arc.end == segs[-1][-1]
    assert set(arc.points.tolist()) <= set(v for s in segs for v in s)
    assert np.all(np.diff(arc.segment) >= 0)
    for k, v in zip(arc.segment, arc.points):
        assert v in segs[k]


def test_extract_arc_rejects_mismatched_segments():
    with pytest.raises(PreconditionError):
        extract_arc([[0, 1], [2, 3]])


def test_extract_arc_shortcuts_revisits():
    arc = extract_arc([[0, 1, 2, 3], [3, 2, 5], [5, 6]])
    assert arc.points.tolist() == [0, 1, 2, 5, 6]


@given(st.integers(2, 25), st.integers(0, 1000))
def test_subarc_diameters_match_brute_force(m, seed):
    p = np.random.default_rng(seed).normal(size=(m, 2))
    d = dist_matrix(p)
    np.testing.assert_allclose(np.triu(subarc_diameters(d)), np.triu(brute_subarc_diam(d)))


def test_straight_arc_certifies_with_constant_one():
    s = build_space(np.linspace(0, 1, 51))
    cert = certify_quasiarc(s, DiscreteArc(np.arange(51)), 0.1)
    assert cert.M == pytest.approx(1.0)


def test_zigzag_arc_has_large_constant():
    # go out and come back near the start: the endpoints are close but the subarc is long
    p = np.c_[np.r_[np.linspace(0, 1, 21), np.linspace(1, 0, 21)[1:]], np.r_[np.zeros(21), np.full(20, 0.02)]]
    s = build_space(p)
    cert = certify_quasiarc(s, DiscreteArc(np.arange(41)), 0.05)
    assert cert.M >= 19.0
    assert set(cert.worst_pair) & {0, 40}


def test_build_quasiarc_on_disk(disk, disk_pm):
    order = disk.canonical_order
    x, y = int(order[0]), int(order[-1])
    eps = disk.dist(x, y) / 20
    b = build_quasiarc(disk, x, y, eps, Q=2.0, lam=1.0, D=4.0, pm=disk_pm)
    assert b.arc.start == x and b.arc.end == y
    assert b.certificate.M <= 3.0
    assert b.radius_ratio <= b.N
    assert b.N == pytest.approx(containment_factor(1.0, 4.0, 2.0))
    with pytest.raises(PreconditionError):
        build_quasiarc(disk, x, y, 10.0, pm=disk_pm)


@given(st.integers(0, 500))
def test_minimax_radius_matches_threshold_scan(seed):
    rng = np.random.default_rng(seed)
    p = rng.uniform(0, 1, (int(rng.integers(3, 25)), 2))
    s = build_space(p, h=0.35)
    d = dist_matrix(p)
    t = minimax_radius(s, 0)
    np.testing.assert_allclose(t, minimax_bisect(d, 0.35, 0))


def test_bounded_turning_convex_set_is_one(disk):
    est = bounded_turning_constant(disk, max_sources=10)
    assert est.lam == pytest.approx(1.0, abs=0.05)
    assert est.lam_witness >= est.lam - 1e-12


def test_bounded_turning_detects_slit():
    # a U shape: the two tips are close in the plane but far along the set
    t = np.linspace(0, 1, 60)
    p = np.vstack([np.c_[np.zeros(60), t], np.c_[np.linspace(0, 0.2, 12)[1:-1], np.zeros(10)],
                   np.c_[np.full(60, 0.2), t]])
    s = build_space(p, h=0.03)
    est = bounded_turning_constant(s, window=(0.15, 0.5))
    assert est.lam >= 4.0


def test_loop_reversal_preserves_lengths():
    s = build_space(np.c_[np.cos(np.arange(7)), np.sin(np.arange(7))])
    loop = DiscreteLoop.from_points(s, np.arange(7))
    rev = loop.reversed()
    assert rev.length == pytest.approx(loop.length)
    for k in range(7):
        assert rev.edge_lengths[k] == pytest.approx(s.dist(rev.points[k], rev.points[(k + 1) % 7]))
    with pytest.raises(PreconditionError):
        DiscreteLoop(np.array([0, 1, 0]), np.ones(3))
