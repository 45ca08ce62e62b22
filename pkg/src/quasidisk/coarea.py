"""Level-set bands of distance functions, the co-area inequality, quasiconvex paths
through good level bands, and a discrete 2-modulus bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .arcs import DiscreteArc, build_quasiarc, extract_arc
from .errors import DisconnectedError, PreconditionError
from .space import FiniteMetricSpace, _restrict, component_labels, covering_number, hausdorff_proxy, path_metric


@dataclass(frozen=True, eq=False)
class LevelSetDecomposition:
    """Bands ``L_k = {k w <= dist(., E) < (k + 1) w}`` minus ``E``, for ``k < K``."""

    space: FiniteMetricSpace
    E: np.ndarray
    dist: np.ndarray
    w: float
    t_max: float

    @property
    def n_bands(self) -> int:
        return int(math.ceil(self.t_max / self.w - 1e-12)) if self.t_max > 0 else 0

    @property
    def centers(self) -> np.ndarray:
        """Band midpoints ``t_k``."""
        return (np.arange(self.n_bands) + 0.5) * self.w

    @cached_property
    def band_index(self) -> np.ndarray:
        """Band of each point, ``-1`` on ``E`` or beyond the last band."""
        finite = np.isfinite(self.dist)
        k = np.full(self.dist.shape, -1, dtype=np.int64)
        k[finite] = np.floor(self.dist[finite] / self.w + 1e-12).astype(np.int64)
        k[(self.dist <= 0) | (k >= self.n_bands)] = -1
        k[self.E] = -1
        return k

    def band(self, k) -> np.ndarray:
        return np.flatnonzero(self.band_index == k)

    def sublevel(self, t) -> np.ndarray:
        """``E_t = {dist(., E) < t}``."""
        return np.flatnonzero(self.dist < t)

    def components(self, t) -> np.ndarray:
        """Component labels of ``F_t = {dist(., E) > t}`` in the neighborhood graph (-1 outside)."""
        return component_labels(self.space.graph, self.dist > t)

    @cached_property
    def band_measures(self) -> np.ndarray:
        """Length proxy of each band: covering number at scale ``w`` times ``w``.

        Bands can be sparser than ``w`` (a few isolated points), so the count
        is taken directly; ``w`` already exceeds the sample spacing.
        """
        order = self.space.canonical_order
        out = np.zeros(self.n_bands)
        for k in range(self.n_bands):
            b = self.band(k)
            if b.size:
                out[k] = covering_number(self.space, b, self.w, order=order[np.isin(order, b)]) * self.w
        return out

    def to_dict(self):
        return {"E": [int(v) for v in self.E], "w": self.w, "t_max": self.t_max,
                "bands": [[int(v) for v in self.band(k)] for k in range(self.n_bands)],
                "band_measures": [float(v) for v in self.band_measures]}


def level_sets(space: FiniteMetricSpace, E, t_max: float, w: float | None = None, pm=None) -> LevelSetDecomposition:
    """Banded level sets of the graph distance to ``E`` (multi-source Dijkstra).

    ``w`` defaults to twice the point spacing and must be at least the spacing.
    """
    E = np.unique(np.asarray(E, dtype=np.intp))
    if E.size == 0:
        raise PreconditionError("E must be nonempty")
    w = 2.0 * space.spacing if w is None else float(w)
    if w < space.spacing * (1 - 1e-12):
        raise PreconditionError(f"band width {w:.4g} is below the point spacing {space.spacing:.4g}")
    pm = path_metric(space) if pm is None else pm
    dist = csgraph.dijkstra(pm.graph, directed=False, indices=E, min_only=True)
    return LevelSetDecomposition(space, E, dist, w, max(0.0, float(t_max)))


@dataclass(frozen=True)
class CoareaCheck:
    lhs: float
    rhs: float
    ratio: float

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio}


def coarea_check(dec: LevelSetDecomposition) -> CoareaCheck:
    """``sum_k mu1(L_k) w`` against ``mu2(E_T)``; the ratio is the empirical ``omega``."""
    lhs = float(dec.band_measures.sum() * dec.w)
    region = dec.sublevel(dec.n_bands * dec.w) if dec.n_bands else dec.E
    region = np.union1d(region, dec.E)
    space = dec.space
    if space.weight2 is not None:
        rhs = float(space.weight2[region].sum())
    else:
        rhs = hausdorff_proxy(space, 2, region, dec.w)
    if rhs <= 0:
        raise PreconditionError("zero area on the right-hand side")
    return CoareaCheck(lhs, rhs, lhs / rhs)


def calibrate_omega(space: FiniteMetricSpace, n_continua=5, w=None, T=None, seed=0, pm=None):
    """Largest co-area ratio over random geodesic base continua.

    Each continuum is a graph geodesic between two points about ``diam / 4``
    apart; bands run to ``T`` (default ``diam / 8``).
    """
    pm = path_metric(space) if pm is None else pm
    T = space.diam / 8.0 if T is None else T
    rng = np.random.default_rng(seed)
    order = space.canonical_order
    ratios, continua = [], []
    while len(ratios) < n_continua:
        x = int(order[rng.integers(space.n)])
        dx = space.distances_from(x)
        cand = np.flatnonzero(np.abs(dx - space.diam / 4) <= space.diam / 16)
        if cand.size == 0:
            continue
        y = int(cand[rng.integers(cand.size)])
        try:
            E = pm.geodesic(x, y)
        except DisconnectedError:
            continue
        ratios.append(coarea_check(level_sets(space, E, T, w, pm)).ratio)
        continua.append((x, y))
    return float(max(ratios)), ratios, continua


# ---------------------------------------------------------------------------
# good levels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelSearch:
    t0: float | None
    band: int | None
    qualifying: list
    tested: list
    threshold: float
    fraction: float
    diagnostics: list = field(default_factory=list)

    def to_dict(self):
        return {"t0": self.t0, "band": self.band, "qualifying": self.qualifying, "tested": self.tested,
                "threshold": self.threshold, "fraction": self.fraction, "diagnostics": list(self.diagnostics)}


def measure_threshold(C, omega, N, s, r) -> float:
    return 8.0 * C * omega * N * N * s * r


def good_level_search(dec: LevelSetDecomposition, r: float, s: float, C: float, N: float, omega: float) -> LevelSearch:
    """Bands with midpoint in ``[0, r / s]`` whose length proxy is below ``8 C omega N^2 s r``.

    At least half of the tested bands should qualify; fewer, or infinite
    constants, produce diagnostics rather than errors.
    """
    diagnostics = []
    if s <= 8 * N:
        diagnostics.append(f"s={s:.4g} does not exceed 8N={8 * N:.4g}")
    threshold = measure_threshold(C, omega, N, s, r)
    if not math.isfinite(threshold):
        diagnostics.append("infinite regularity or co-area constant: the space fails 2-regularity at this scale")
    tested = [k for k, t in enumerate(dec.centers) if t <= r / s * (1 + 1e-12)]
    if not tested and dec.n_bands:
        tested = [0]
    mu = dec.band_measures
    qualifying = [k for k in tested if mu[k] < threshold and dec.band(k).size]
    fraction = len(qualifying) / len(tested) if tested else 0.0
    if not qualifying:
        diagnostics.append("no qualifying band: measure estimate fails, the space is not 2-regular at this scale")
    elif fraction < 0.5:
        diagnostics.append(f"only {fraction:.2f} of bands qualify (expected at least 1/2)")
    k0 = qualifying[0] if qualifying else None
    return LevelSearch(None if k0 is None else float(dec.centers[k0]), k0, qualifying, tested, float(threshold),
                       fraction, diagnostics)


# ---------------------------------------------------------------------------
# quasiconvex paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constants:
    """Hypothesis constants consumed by the quasiconvexity construction."""

    C: float = 4.0
    Lam: float = 1.0
    M: float = 3.0
    N: float = 6.0
    omega: float = 2.0
    Q: float = 2.0
    D: float = 4.0
    lam: float = 1.0

    @property
    def eps_ratio(self) -> float:
        """``r / eps`` for the inner quasiarc scale."""
        return 32.0 * self.M * self.N * self.Lam * (self.Lam + 1.0)

    @property
    def s0(self) -> float:
        return 5.0 * self.eps_ratio

    @property
    def modulus_constant(self) -> float:
        return 1.0 / (16.0 * self.C * self.omega ** 2 * self.N ** 2 * self.s0 ** 2)

    def to_dict(self):
        return {"C": self.C, "Lambda": self.Lam, "M": self.M, "N": self.N, "omega": self.omega,
                "Q": self.Q, "D": self.D, "lambda": self.lam, "s0": self.s0}


@dataclass(frozen=True)
class QuasiconvexPath:
    arc: DiscreteArc
    length: float
    ratio: float
    depth: int
    levels: list
    n_fallback: int
    diagnostics: list = field(default_factory=list)

    def to_dict(self):
        return {"arc": self.arc.to_dict(), "length": self.length, "L_hat": self.ratio, "depth": self.depth,
                "levels": self.levels, "n_fallback": self.n_fallback, "diagnostics": list(self.diagnostics)}


def _band_path(space, dec, k, x, y, r):
    """Shortest route ``x -> p ~ q -> y`` with ``p ~ q`` inside band ``k``,
    ``p`` in ``B(x, r/4)`` and ``q`` in ``B(y, r/4)``; returns ``(p, band path, q, cost)``."""
    band = dec.band(k)
    if band.size == 0:
        return None
    dx = space.cross([x], band)[0]
    dy = space.cross([y], band)[0]
    near_x = dx < r / 4
    near_y = dy < r / 4
    if not near_x.any() or not near_y.any():
        return None
    m = band.size
    g = _restrict(space.graph, dec.band_index == k)[band][:, band].tocoo()
    # virtual source m and sink m + 1
    rows = np.r_[g.row, np.full(near_x.sum(), m), np.flatnonzero(near_y)]
    cols = np.r_[g.col, np.flatnonzero(near_x), np.full(near_y.sum(), m + 1)]
    vals = np.r_[g.data, dx[near_x] + 1e-300, dy[near_y] + 1e-300]
    G = sparse.csr_matrix((vals, (rows, cols)), shape=(m + 2, m + 2))
    dist, pred = csgraph.dijkstra(G, directed=True, indices=m, return_predecessors=True)
    if not np.isfinite(dist[m + 1]):
        return None
    path = []
    v = int(pred[m + 1])
    while v != m:
        path.append(v)
        v = int(pred[v])
    path = band[np.asarray(path[::-1], dtype=np.intp)]
    return int(path[0]), path, int(path[-1]), float(dist[m + 1])


def quasiconvex_path(space: FiniteMetricSpace, x: int, y: int, constants: Constants | None = None,
                     w: float | None = None, min_bands=3, pm=None) -> QuasiconvexPath:
    """Join ``x`` to ``y`` by an arc of length comparable to ``d(x, y)`` through good level bands.

    At each level: build the quasiarc ``E`` from ``x`` to ``y``, band the
    distance to ``E``, pick a qualifying band, route through it from
    ``B(x, r/4)`` to ``B(y, r/4)``, and recurse on both end gaps.  Gaps at or
    below the connection radius close with a graph edge.  When bands are
    too coarse for the gap (``r / 4 <= w``) a graph geodesic closes the
    gap instead; such fallbacks are counted.
    """
    k = constants or Constants()
    pm = path_metric(space) if pm is None else pm
    w = 2.0 * space.spacing if w is None else float(w)
    r0 = space.dist(x, y)
    max_depth = max(1, int(math.ceil(math.log(max(r0 / pm.h, 1.0), 4))) + 2)
    levels: list = []
    diagnostics: list = []
    fallback = [0]
    depth_seen = [0]

    def solve(a, b, depth):
        depth_seen[0] = max(depth_seen[0], depth)
        assert depth <= max_depth, "recursion depth bound exceeded"
        if a == b:
            return [[a]]
        r = space.dist(a, b)
        if r <= pm.h:
            return [[a, b]]
        if r / 4 <= w:
            fallback[0] += 1
            return [pm.geodesic(a, b)]
        eps_paper = r / k.eps_ratio
        eps = min(max(eps_paper, pm.h), r / 2)
        E = build_quasiarc(space, a, b, eps, Q=k.Q, pm=pm).arc.points
        s_eff = min(k.s0, r / (min_bands * w))
        dec = level_sets(space, E, r / s_eff + w, w, pm)
        search = good_level_search(dec, r, s_eff, k.C, k.N, k.omega)
        best = None
        for band in search.qualifying:
            found = _band_path(space, dec, band, a, b, r)
            if found is not None and (best is None or found[3] < best[3]):
                best = found + (band,)
        levels.append({"depth": depth, "gap": r, "eps_paper": eps_paper, "eps": eps, "s0": k.s0, "s": s_eff,
                       "band": None if best is None else best[4], "fraction": search.fraction})
        if best is None:
            diagnostics.append(f"no qualifying band joins B(x, r/4) to B(y, r/4) for gap {r:.4g}")
            fallback[0] += 1
            return [pm.geodesic(a, b)]
        p, route, q, _, band = best
        lo, hi = band * w, (band + 1) * w
        assert np.all((dec.dist[route] >= lo - 1e-12) & (dec.dist[route] < hi + 1e-12)), "band containment"
        return solve(a, p, depth + 1) + [list(route)] + solve(q, b, depth + 1)

    segments = solve(x, y, 0)
    arc = extract_arc(segments)
    length = arc.length(space)
    assert length >= r0 * (1 - 1e-12), "path shorter than the distance"
    return QuasiconvexPath(arc, length, length / r0 if r0 > 0 else 1.0, depth_seen[0], levels, fallback[0],
                           diagnostics)


# ---------------------------------------------------------------------------
# modulus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModulusBound:
    family: list
    numerical: float
    analytic: float
    low_confidence: bool
    certificate: dict
    diagnostics: list = field(default_factory=list)

    def to_dict(self):
        return {"family": [[int(v) for v in a] for a in self.family], "numerical": self.numerical,
                "analytic": self.analytic, "low_confidence": self.low_confidence,
                "certificate": self.certificate, "diagnostics": list(self.diagnostics)}


def arc_resistance(space: FiniteMetricSpace, arc) -> float:
    """``sum_v l_v**2 / m_v`` along an arc, with ``l_v`` half the adjacent edge lengths."""
    pts = np.asarray(arc, dtype=np.intp)
    if space.weight2 is None:
        raise PreconditionError("modulus needs area weights")
    if len(pts) < 2:
        return 0.0
    e = np.array([space.dist(a, b) for a, b in zip(pts[:-1], pts[1:])])
    ell = np.r_[e, 0.0] / 2 + np.r_[0.0, e] / 2
    return float((ell ** 2 / space.weight2[pts]).sum())


def optimal_density_certificate(space: FiniteMetricSpace, family) -> dict:
    """Replayable dual certificate: the optimal density on each arc, its admissibility and mass."""
    rho = {}
    for arc in {tuple(int(v) for v in a) for a in family}:
        pts = np.asarray(arc, dtype=np.intp)
        e = np.array([space.dist(a, b) for a, b in zip(pts[:-1], pts[1:])])
        ell = np.r_[e, 0.0] / 2 + np.r_[0.0, e] / 2
        res = float((ell ** 2 / space.weight2[pts]).sum())
        for v, val in zip(pts, ell / space.weight2[pts] / res):
            rho[int(v)] = float(val)
    mass = float(sum(val ** 2 * space.weight2[v] for v, val in rho.items()))
    worst = math.inf
    for arc in family:
        pts = np.asarray(arc, dtype=np.intp)
        e = np.array([space.dist(a, b) for a, b in zip(pts[:-1], pts[1:])])
        ell = np.r_[e, 0.0] / 2 + np.r_[0.0, e] / 2
        worst = min(worst, float(sum(rho[int(v)] * l for v, l in zip(pts, ell))))
    return {"mass": mass, "min_rho_length": worst, "support": len(rho)}


def disjoint_family_modulus(space: FiniteMetricSpace, family) -> float:
    """Exact discrete 2-modulus of a family of vertex-disjoint arcs.

    A density ``rho`` is admissible when ``sum_{v in arc} rho_v l_v >= 1`` for
    every arc; its mass is ``sum rho_v**2 m_v``.  For disjoint arcs the optimum
    splits into one Cauchy-Schwarz problem per arc, giving
    ``sum_arcs 1 / sum_v (l_v**2 / m_v)``.
    """
    unique = {tuple(int(v) for v in a) for a in family}
    total = 0.0
    seen: set = set()
    for arc in sorted(unique):
        if seen.intersection(arc):
            raise PreconditionError("family arcs must be vertex-disjoint")
        seen.update(arc)
        res = arc_resistance(space, arc)
        total += math.inf if res == 0 else 1.0 / res
    return total


def modulus_lower_bound(space: FiniteMetricSpace, x: int, y: int, constants: Constants | None = None,
                        w: float | None = None, min_bands=3, pm=None) -> ModulusBound:
    """Lower bound for the 2-modulus of paths joining ``B(x, r/4)`` to ``B(y, r/4)``.

    The family consists of one band route per qualifying level band around
    the quasiarc from ``x`` to ``y``; bands are disjoint so the family modulus
    is exact and bounds the full modulus from below.  The analytic constant
    ``1 / (16 C omega^2 N^2 s0^2)`` is reported alongside.
    """
    k = constants or Constants()
    pm = path_metric(space) if pm is None else pm
    w = 2.0 * space.spacing if w is None else float(w)
    r = space.dist(x, y)
    try:
        pm.geodesic(x, y)
    except DisconnectedError:
        return ModulusBound([], 0.0, k.modulus_constant, True, {}, ["endpoints lie in different components"])
    eps = min(max(r / k.eps_ratio, pm.h), r / 2)
    E = build_quasiarc(space, x, y, eps, Q=k.Q, pm=pm).arc.points
    s_eff = min(k.s0, r / (min_bands * w))
    dec = level_sets(space, E, r / s_eff + w, w, pm)
    search = good_level_search(dec, r, s_eff, k.C, k.N, k.omega)
    family = []
    for band in search.qualifying:
        found = _band_path(space, dec, band, x, y, r)
        if found is not None:
            family.append(found[1])
    numerical = disjoint_family_modulus(space, family) if family else 0.0

    cert = optimal_density_certificate(space, family) if family else {}
    return ModulusBound(family, float(numerical), k.modulus_constant, len(family) < 3, cert,
                        list(search.diagnostics))
