import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import cached_fixture, cached_pm
from oracles import graph_of
from quasidisk.coarea import (Constants, calibrate_omega, coarea_check, disjoint_family_modulus, good_level_search,
                              level_sets, measure_threshold, modulus_lower_bound, optimal_density_certificate,
                              quasiconvex_path)
from quasidisk.errors import PreconditionError
from quasidisk.space import build_space


def test_level_sets_match_multisource_dijkstra():
    rng = np.random.default_rng(3)
    p = rng.uniform(0, 1, (150, 2))
    s = build_space(p, h=0.15)
    E = [0, 1, 2]
    dec = level_sets(s, E, 0.6, w=0.1)
    g = graph_of(s.pairwise(np.arange(s.n)), 0.15)
    ref = nx.multi_source_dijkstra_path_length(g, set(E))
    for v in range(s.n):
        assert dec.dist[v] == pytest.approx(ref.get(v, math.inf))
    labels = dec.band_index
    for k in range(dec.n_bands):
        b = dec.band(k)
        assert np.all((dec.dist[b] >= k * 0.1 - 1e-12) & (dec.dist[b] < (k + 1) * 0.1 + 1e-12))
    assert np.all(labels[E] == -1)
    covered = np.sort(np.r_[np.flatnonzero(labels >= 0), E])
    np.testing.assert_array_equal(covered, np.sort(np.r_[np.flatnonzero((dec.dist > 0) & (dec.dist < 0.6)), E]))


def test_level_sets_reject_thin_bands_and_empty_source(disk):
    with pytest.raises(PreconditionError):
        level_sets(disk, [0], 0.5, w=disk.spacing / 10)
    with pytest.raises(PreconditionError):
        level_sets(disk, [], 0.5)


@pytest.mark.parametrize("mult", [1, 2, 4])
def test_point_source_coarea_ratio_is_order_one(disk, disk_pm, mult):
    z = int(np.argmin(np.hypot(*disk.chart.T)))
    dec = level_sets(disk, [z], 0.5, w=mult * disk.spacing, pm=disk_pm)
    assert 0.5 < coarea_check(dec).ratio < 2.0


def test_calibrated_omega_stable_across_widths(disk, disk_pm):
    vals = [calibrate_omega(disk, w=m * disk.spacing, seed=1, pm=disk_pm)[0] for m in (1, 2, 4)]
    assert max(vals) / min(vals) < 3


def test_good_level_search_threshold_and_diagnostics(disk, disk_pm):
    z = int(np.argmin(np.hypot(*disk.chart.T)))
    dec = level_sets(disk, [z], 0.4, pm=disk_pm)
    res = good_level_search(dec, 0.8, 4.0, 4.0, 6.0, 1.0)
    assert res.threshold == measure_threshold(4.0, 1.0, 6.0, 4.0, 0.8) == 8 * 4 * 36 * 4 * 0.8
    assert res.fraction == 1.0 and any("8N" in d for d in res.diagnostics)
    starved = good_level_search(dec, 0.8, 4.0, 1e-9, 6.0, 1.0)
    assert not starved.qualifying and starved.diagnostics
    inf = good_level_search(dec, 0.8, 64.0, math.inf, 6.0, 1.0)
    assert any("infinite" in d for d in inf.diagnostics)


@settings(max_examples=10)
@given(st.integers(0, 1000))
def test_quasiconvex_path_properties(seed):
    disk = cached_fixture("flat-disk", 3000)
    pm = cached_pm("flat-disk", 3000)
    rng = np.random.default_rng(seed)
    x, y = (int(v) for v in rng.choice(disk.n, 2, replace=False))
    res = quasiconvex_path(disk, x, y, pm=pm)
    assert res.arc.start == x and res.arc.end == y
    assert len(set(res.arc.points.tolist())) == len(res.arc)
    gaps = [disk.dist(a, b) for a, b in zip(res.arc.points[:-1], res.arc.points[1:])]
    assert max(gaps) <= pm.h * (1 + 1e-9)
    assert 1.0 <= res.ratio <= 1.5


def test_quasiconvex_path_around_a_hole():
    ann = cached_fixture("annulus", 4000)
    pm = cached_pm("annulus", 4000)
    a = int(np.argmin(np.hypot(*(ann.chart - [0.65, 0.0]).T)))
    b = int(np.argmin(np.hypot(*(ann.chart - [-0.65, 0.0]).T)))
    res = quasiconvex_path(ann, a, b, pm=pm)
    # the straight segment is blocked; any path has length at least the half-circle of radius 0.3
    assert res.length >= math.pi * 0.3
    assert res.ratio <= math.pi / 2 + 0.5


def test_modulus_family_is_disjoint_and_certified(disk, disk_pm):
    order = disk.canonical_order
    x, y = int(order[0]), int(order[400])
    mb = modulus_lower_bound(disk, x, y, pm=disk_pm)
    fam = mb.family
    assert fam, mb.diagnostics
    flat = [v for a in fam for v in a]
    assert len(flat) == len(set(flat))
    cert = optimal_density_certificate(disk, fam)
    assert cert["mass"] == pytest.approx(mb.numerical, rel=1e-9)
    assert cert["min_rho_length"] >= 1 - 1e-9
    assert mb.numerical > mb.analytic


def test_disjoint_modulus_of_parallel_segments():
    # two parallel unit segments with unit-area cells at spacing 0.1: each has resistance 0.1 * 0.1 * 10 = 0.1
    x = np.linspace(0, 1, 11)
    p = np.vstack([np.c_[x, np.zeros(11)], np.c_[x, np.ones(11)]])
    s = build_space(p, weight2=np.full(22, 0.1))
    arcs = [list(range(11)), list(range(11, 22))]
    # l_v = 0.1 inside, 0.05 at the ends; sum l^2/m = (9 * 0.01 + 2 * 0.0025) / 0.1 = 0.95
    assert disjoint_family_modulus(s, arcs) == pytest.approx(2 / 0.95)
    with pytest.raises(PreconditionError):
        disjoint_family_modulus(s, [[0, 1, 2], [2, 3]])


def test_constants_derived_quantities():
    k = Constants(M=3, N=6, Lam=1)
    assert k.eps_ratio == 32 * 3 * 6 * 2
    assert k.s0 == 5 * k.eps_ratio
