import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import cached_fixture
from oracles import brute_three_point, dist_matrix, point_in_polygon
from quasidisk.errors import (ChartError, NotPorousError, PreconditionError, ResolutionError, TopologyError)
from quasidisk.invariants import (Budgets, ahlfors_regularity, assouad_dimension, certify_loop_closeness,
                                  check_window, complementary_diameters, llc_constants, loop_winding,
                                  polyline_distance, porosity_constant, recheck_porosity_witness,
                                  three_point_constant, winding_field, winding_number)
from quasidisk.quasicircle import boundary_points
from quasidisk.space import build_space


def test_window_must_span_an_octave():
    with pytest.raises(PreconditionError):
        check_window((1.0, 1.5))
    assert check_window((1.0, 2.0)) == (1.0, 2.0)


def test_assouad_segment_and_plane():
    seg = build_space(np.linspace(0, 1, 2000))
    assert assouad_dimension(seg).Q == pytest.approx(1.0, abs=0.15)
    grid = cached_fixture("grid", 4900)
    assert 1.8 <= assouad_dimension(grid).Q <= 2.2


def test_assouad_single_point_is_zero():
    s = build_space(np.array([[0.0, 0.0]]))
    assert assouad_dimension(s).Q == 0.0


def test_ahlfors_on_grid_and_strip():
    rep = ahlfors_regularity(cached_fixture("grid", 4900))
    assert rep.C <= 4.0 and not rep.scale_dependent
    strip = cached_fixture("strip", 4000)
    rep = ahlfors_regularity(strip, window=(2 * strip.spacing, 5.0))
    assert rep.scale_dependent
    # below the width the strip still looks planar
    small = ahlfors_regularity(strip, window=(2 * strip.spacing, 0.2))
    assert not small.scale_dependent


def test_ahlfors_requires_measure():
    s = build_space(np.linspace(0, 1, 50))
    with pytest.raises(PreconditionError):
        ahlfors_regularity(s)


def test_llc_flat_disk_near_one(disk):
    rep = llc_constants(disk, budget=Budgets(max_centers=16, radii_per_octave=4))
    assert 1.0 <= rep.lam1 <= 1.2 and 1.0 <= rep.lam2 <= 1.5
    assert "caveat" in rep.to_dict()


def test_llc_dumbbell_exceeds_disk(disk):
    bell = cached_fixture("dumbbell", 3000)
    b = Budgets(max_centers=40, radii_per_octave=4)
    assert llc_constants(bell, budget=b).lam > llc_constants(disk, budget=b).lam


@given(st.integers(4, 30), st.integers(0, 1000))
def test_three_point_matches_brute_force(n, seed):
    rng = np.random.default_rng(seed)
    p = rng.normal(size=(n, 2))
    d = dist_matrix(p)
    assert three_point_constant(p).lam == pytest.approx(brute_three_point(d), rel=1e-12)


def test_three_point_rejects_tiny_loops():
    with pytest.raises(PreconditionError):
        three_point_constant(np.eye(3)[:, :2])


def test_complementary_diameters_shapes():
    p = np.c_[np.cos(np.linspace(0, 6, 10)), np.sin(np.linspace(0, 6, 10))]
    inner, outer = complementary_diameters(dist_matrix(p))
    assert inner.shape == outer.shape == (10, 10)


def test_porosity_of_boundary_and_point(disk):
    rim = boundary_points(disk)
    assert np.all(np.hypot(*disk.chart[rim].T) > 1 - 3 * disk.spacing)
    rep = porosity_constant(disk, rim)
    assert rep.C <= 4.0
    y, r, x = rep.worst
    assert recheck_porosity_witness(disk, rim, y, r, x, rep.C)
    pt = porosity_constant(disk, [disk.canonical_order[0]])
    assert pt.C <= 4.0


def test_not_porous_raises_with_witness():
    s = build_space(np.linspace(0, 1, 200))
    with pytest.raises(NotPorousError) as exc:
        porosity_constant(s, np.arange(200))
    assert exc.value.witness is not None


# -- winding ------------------------------------------------------------------

def regular_polygon(n, center=(0.0, 0.0), radius=1.0, phase=0.0):
    t = phase + 2 * np.pi * np.arange(n) / n
    return np.asarray(center) + radius * np.c_[np.cos(t), np.sin(t)]


def test_winding_basic():
    sq = regular_polygon(16)
    assert winding_number(sq, (0, 0)) == 1
    assert winding_number(sq[::-1], (0, 0)) == -1
    assert winding_number(sq, (3, 0)) == 0
    twice = np.vstack([regular_polygon(16), regular_polygon(16, phase=np.pi / 16)])
    assert winding_number(twice, (0, 0)) == 2


def test_winding_resolution_errors():
    with pytest.raises(ResolutionError):
        winding_number(np.array([[1.0, 0.0], [-1.0, 0.0]]), (0.0, 0.0))
    with pytest.raises(PreconditionError):
        winding_number(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), (0.0, 0.0))


def test_loop_winding_needs_chart():
    s = build_space(np.c_[np.cos(np.arange(6)), np.sin(np.arange(6)), np.zeros(6)])
    with pytest.raises(ChartError):
        loop_winding(s, np.arange(6), 0)


@given(st.integers(0, 10_000))
def test_winding_field_matches_ray_casting_for_star_polygons(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 40))
    t = np.sort(rng.uniform(0, 2 * np.pi, n))
    r = rng.uniform(0.3, 1.0, n)
    poly = np.c_[r * np.cos(t), r * np.sin(t)]
    q = rng.uniform(-1.1, 1.1, (50, 2))
    q = q[polyline_distance(poly, q) > 1e-6]
    w = winding_field(poly, q)
    expect = np.array([point_in_polygon(poly, p) for p in q])
    np.testing.assert_array_equal(w != 0, expect)


def test_polyline_distance():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    assert polyline_distance(sq, [[0.5, 0.5]])[0] == pytest.approx(0.5)
    assert polyline_distance(sq, [[2.0, 0.5]])[0] == pytest.approx(1.0)


def test_loop_closeness_passes_and_catches_mismatch():
    a = regular_polygon(64)
    b = regular_polygon(64, radius=1.02)
    res = certify_loop_closeness(a, b, 0.11, 1.0, queries=[[0, 0], [3, 0], [1.0, 0]])
    assert res.passed and len(res.checked) == 2 and len(res.excluded) == 1
    far = certify_loop_closeness(a, regular_polygon(64, radius=1.5), 0.1, 1.0)
    assert not far.passed and far.violation[0] == "pointwise"
    # an understated Lam shrinks the excluded tube until opposite orientations get compared
    with pytest.raises(TopologyError):
        certify_loop_closeness(a, a[::-1], 10.0, 0.01, queries=[[0.0, 0.0]], alpha_index=[0], beta_index=[0])
