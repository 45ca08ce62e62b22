"""Chord-arc loops around a point at a given scale, and the domains they bound.

The loop is an exact discrete minimizer of the weighted length
``sigma(gamma) = sum over edges of d(u, v) (rho(u) + rho(v)) / 2`` with
``rho = (R / d'(z, .))**2 + 1`` among neighborhood-graph cycles that wind
around ``z``; a coarse polygon built from a net on a chart circle serves as
the comparison loop.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

from .arcs import DiscreteLoop
from .errors import ChartError, GuardError, PreconditionError, ResolutionError, TopologyError
from .invariants import (Budgets, ahlfors_regularity, check_window, llc_constants, loop_distance_matrix,
                         porosity_constant, three_point_constant, winding_field, winding_number)
from .space import FiniteMetricSpace, PathMetricSpace, path_metric

RAY_ANGLE = 0.7853981633974483 * 0.9127  # generic direction, avoids lattice-aligned rays
SHEETS = 2


def _require_chart(space):
    if space.chart is None:
        raise ChartError("this operation needs planar chart coordinates")


def _winding(space, pts, z):
    return winding_number(space.chart[np.asarray(pts, dtype=np.intp)], space.chart[z])


# ---------------------------------------------------------------------------
# cost model
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LoopCostModel:
    """Weight ``rho(x) = (R / d'(z, x))**2 + 1`` with trapezoid edge costs."""

    z: int
    R: float
    dz: np.ndarray

    @classmethod
    def build(cls, pm: PathMetricSpace, z: int, R: float) -> "LoopCostModel":
        return cls(int(z), float(R), center_distances(pm, z))

    def rho(self, idx=None) -> np.ndarray:
        d = self.dz if idx is None else self.dz[np.asarray(idx, dtype=np.intp)]
        with np.errstate(divide="ignore"):
            return (self.R / d) ** 2 + 1.0

    def edge_costs(self, u, v, lengths) -> np.ndarray:
        return np.asarray(lengths) * (self.rho(u) + self.rho(v)) / 2.0


def center_distances(pm: PathMetricSpace, z: int) -> np.ndarray:
    """Path distances from ``z``; if ``z`` has no graph neighbors (a point in a hole) the base metric is used."""
    dz = pm.distances_from(z)
    if np.isfinite(dz).sum() == 1:
        return pm.base.distances_from(z)
    return dz


def loop_cost(loop: DiscreteLoop, model: LoopCostModel) -> float:
    """Trapezoid sum of ``rho`` along the loop's edges."""
    pts = loop.points
    if np.any(model.dz[pts] <= 0):
        raise PreconditionError("loop passes through the center")
    return float(model.edge_costs(pts, np.roll(pts, -1), loop.edge_lengths).sum())


# ---------------------------------------------------------------------------
# cycles from closed walks
# ---------------------------------------------------------------------------

def decompose_cycles(walk) -> list[list[int]]:
    """Split a closed vertex walk (first vertex not repeated at the end) into simple cycles.

    Whenever a vertex recurs, the portion since its last visit is closed off
    as a cycle.  Turning angles add up over the pieces, so the windings of the
    cycles sum to the winding of the walk.
    """
    stack: list[int] = []
    pos: dict[int, int] = {}
    cycles = []
    seq = [int(v) for v in walk]
    if not seq:
        return []
    for v in seq + [seq[0]]:
        if v in pos:
            k = pos[v]
            cyc = stack[k:]
            if len(cyc) > 1:
                cycles.append(cyc)
            for u in stack[k + 1:]:
                del pos[u]
            del stack[k + 1:]
        else:
            pos[v] = len(stack)
            stack.append(v)
    if len(stack) > 1:
        cycles.append(stack)
    return cycles


def best_winding_cycle(space, walk, z) -> tuple[list[int], int]:
    """Longest simple cycle of the walk with nonzero winding about ``z``."""
    best, wbest = None, 0
    for cyc in decompose_cycles(walk):
        if len(cyc) < 3:
            continue
        try:
            w = _winding(space, cyc, z)
        except ResolutionError:
            continue
        if w != 0 and (best is None or len(cyc) > len(best)):
            best, wbest = cyc, w
    if best is None:
        raise ResolutionError("no cycle with nonzero winding about the center")
    return best, wbest


# ---------------------------------------------------------------------------
# first polygon
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InitialPolygon:
    loop: DiscreteLoop
    winding: int
    C0: float
    eps_paper: float
    eps: float
    net_size: int
    z_sequence: list
    dist_range: tuple
    sigma: float
    diagnostics: list = field(default_factory=list)

    def to_dict(self):
        return {"loop": self.loop.to_dict(), "winding": self.winding, "C0": self.C0, "eps_paper": self.eps_paper,
                "eps": self.eps, "net_size": self.net_size, "n_z": len(self.z_sequence),
                "dist_range": list(self.dist_range), "sigma": self.sigma, "diagnostics": list(self.diagnostics)}


def chart_scale(space: FiniteMetricSpace, z: int, radius: float) -> float:
    """Median ratio of chart length to metric length over graph edges within ``radius`` of ``z``.

    Converts metric radii into chart radii, so the construction does not
    depend on the units (or local stretching) of the chart.
    """
    _require_chart(space)
    near = np.flatnonzero(space.distances_from(z) <= radius)
    g = space.graph[near].tocoo()
    if g.nnz == 0:
        raise ChartError("no graph edges near the center")
    rows = near[g.row]
    ratio = np.hypot(*(space.chart[rows] - space.chart[g.col]).T) / g.data
    return float(np.median(ratio))


def snap_chart_circle(space: FiniteMetricSpace, z: int, radius: float, step=None) -> np.ndarray:
    """Sample ids nearest to a fine chart circle about ``z`` of metric radius about ``radius``.

    Consecutive repeats are removed.  The chart radius is ``radius`` times the
    local chart scale.
    """
    _require_chart(space)
    k = chart_scale(space, z, radius)
    step = space.spacing / 4 if step is None else step
    m = max(16, int(math.ceil(2 * math.pi * radius / step)))
    phi = 2 * math.pi * np.arange(m) / m
    target = space.chart[z] + k * radius * np.c_[np.cos(phi), np.sin(phi)]
    tree = cKDTree(space.chart)
    gap, idx = tree.query(target)
    if np.max(gap) > 2.0 * space.h * k:
        raise ChartError(f"chart circle of radius {radius:.4g} leaves the sampled region")
    keep = np.r_[True, idx[1:] != idx[:-1]]
    idx = idx[keep]
    if len(idx) > 1 and idx[0] == idx[-1]:
        idx = idx[:-1]
    return idx.astype(np.intp)


def initial_polygon(space: FiniteMetricSpace, z: int, R: float, Lam=1.0, L=1.0, pm=None) -> InitialPolygon:
    """Coarse loop around ``z`` at distance about ``2R`` built from a net on a chart circle.

    A fine chart circle of radius ``2R`` is snapped to samples; a maximal
    ``eps``-net ``S`` of it (graph metric) supplies vertices ``z_k`` chosen
    inductively along the circle, consecutive ``z_k`` are joined by graph
    geodesics, and the closed walk is split into simple cycles, keeping one
    that winds around ``z``.  ``eps = R / (128 Lam L (Lam L + 1))`` is raised
    to the connection radius when smaller.
    """
    _require_chart(space)
    pm = path_metric(space) if pm is None else pm
    eps_paper = R / (128.0 * Lam * L * (Lam * L + 1.0))
    eps = max(eps_paper, pm.h)
    alpha = snap_chart_circle(space, z, 2.0 * R)
    try:
        w_alpha = _winding(space, alpha, z)
    except ResolutionError as exc:
        raise ResolutionError(f"snapped chart circle is too coarse: {exc}") from exc
    if w_alpha == 0:
        raise ResolutionError("snapped chart circle does not wind around the center")

    # graph distances from every circle sample, truncated just beyond 3 eps
    d_alpha = csgraph.dijkstra(pm.graph, directed=False, indices=alpha, limit=3.0 * eps)
    on_alpha = d_alpha[:, alpha]
    members = []
    covered = np.zeros(len(alpha), dtype=bool)
    for i in range(len(alpha)):
        if not covered[i]:
            members.append(i)
            covered |= on_alpha[i] < eps
    members = np.asarray(members)
    to_members = on_alpha[members]          # (|S|, len(alpha))

    def nearest_member(i):
        k = int(np.argmin(to_members[:, i]))
        assert to_members[k, i] < eps
        return k

    seq = [nearest_member(0)]
    i = 0
    while True:
        nxt = np.flatnonzero(to_members[seq[-1], i + 1:] >= eps)
        if nxt.size == 0:
            break
        i = i + 1 + int(nxt[0])
        seq.append(nearest_member(i))
    zs = [int(alpha[members[k]]) for k in seq]

    walk: list[int] = []
    for a, b in zip(zs, zs[1:] + zs[:1]):
        if a == b:
            continue
        walk.extend(pm.geodesic(a, b)[:-1])
    if len(walk) < 3:
        raise ResolutionError("polygon collapsed; increase the scale")
    cycle, w = best_winding_cycle(space, walk, z)
    loop = DiscreteLoop.from_points(space, cycle)

    dz = center_distances(pm, z)
    dmin, dmax = float(dz[loop.points].min()), float(dz[loop.points].max())
    diagnostics = []
    if not (R / 2 <= dmin and dmin <= 3 * R):
        diagnostics.append(f"polygon distance {dmin:.4g} outside [R/2, 3R]")
    model = LoopCostModel(int(z), float(R), dz)
    sigma = loop_cost(loop, model)
    if sigma > 5.0 * loop.length * (1 + 1e-12):
        diagnostics.append("sigma exceeds five times the polygon length")
    return InitialPolygon(loop, w, loop.length / R, eps_paper, eps, len(members), zs, (dmin, dmax), sigma,
                          diagnostics)


# ---------------------------------------------------------------------------
# minimization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MinimizedLoop:
    loop: DiscreteLoop
    sigma: float
    winding: int
    b0_radius: float
    bounds: dict
    diagnostics: list = field(default_factory=list)

    def to_dict(self):
        return {"loop": self.loop.to_dict(), "sigma": self.sigma, "winding": self.winding,
                "b0_radius": self.b0_radius, "bounds": self.bounds, "diagnostics": list(self.diagnostics)}


def edge_sheet_shift(chart: np.ndarray, zc: np.ndarray, u: np.ndarray, v: np.ndarray, ray_angle=RAY_ANGLE):
    """Sheet change ``-1, 0, +1`` of each directed edge ``u -> v`` across the ray from ``zc``.

    With ``A`` the angle measured from the ray in ``[0, 2 pi)`` and ``theta``
    the signed angle subtended by the edge, the shift is
    ``floor((A(u) + theta) / 2 pi)``; reversing an edge negates it.
    """
    pu = chart[u] - zc
    pv = chart[v] - zc
    A = np.mod(np.arctan2(pu[:, 1], pu[:, 0]) - ray_angle, 2 * np.pi)
    theta = np.arctan2(pu[:, 0] * pv[:, 1] - pu[:, 1] * pv[:, 0], (pu * pv).sum(axis=1))
    return np.floor((A + theta) / (2 * np.pi)).astype(np.int64)


def minimize_loop(space: FiniteMetricSpace, z: int, R: float, warm: DiscreteLoop, b0_radius: float | None = None,
                  R0: float | None = None, Lam=1.0, L=1.0, C0: float | None = None, ball_divisor=16.0,
                  pm=None, ray_angle=RAY_ANGLE) -> MinimizedLoop:
    """Exact minimizer of ``sigma`` over graph cycles winding once around ``z``.

    The chart is cut along a ray from ``z`` and the graph lifted to
    ``2 * SHEETS + 1`` sheets.  A cycle of winding one contains an edge
    ``u -> v`` climbing one sheet; the cheapest such cycle through that edge
    closes with a shortest lifted path from ``v`` back to ``u`` on the same
    sheet.  Minimizing over all climbing edges gives the optimum.  The search
    is restricted to the ball ``d'(z, .) <= b0_radius``, by default
    ``R0 / (ball_divisor Lam L)``.
    """
    _require_chart(space)
    pm = path_metric(space) if pm is None else pm
    model = LoopCostModel.build(pm, z, R)
    try:
        w_warm = _winding(space, warm.points, z)
    except ResolutionError as exc:
        raise PreconditionError(f"warm start winding undefined: {exc}") from exc
    if w_warm == 0:
        raise PreconditionError("warm start does not wind around the center")
    sigma_warm = loop_cost(warm, model)
    if not math.isfinite(sigma_warm):
        raise PreconditionError("warm start has infinite cost")
    if b0_radius is None:
        if R0 is None:
            raise PreconditionError("give b0_radius or R0")
        b0_radius = R0 / (ball_divisor * Lam * L)
    if np.any(model.dz[warm.points] > b0_radius * (1 + 1e-12)):
        raise PreconditionError(f"warm start leaves the search ball of radius {b0_radius:.4g}")

    keep = (model.dz <= b0_radius * (1 + 1e-12)) & (model.dz > 0)
    coo = pm.graph.tocoo()
    ok = keep[coo.row] & keep[coo.col]
    u, v, length = coo.row[ok], coo.col[ok], coo.data[ok]
    cost = model.edge_costs(u, v, length)
    zc = space.chart[z]
    shift = edge_sheet_shift(space.chart, zc, u, v, ray_angle)

    n = space.n
    n_sheets = 2 * SHEETS + 1
    rows, cols, vals = [], [], []
    for s in range(n_sheets):
        t = s + shift
        inside = (t >= 0) & (t < n_sheets)
        rows.append(s * n + u[inside])
        cols.append(t[inside] * n + v[inside])
        vals.append(cost[inside])
    G = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(n * n_sheets, n * n_sheets))

    climb = np.flatnonzero(shift == 1)
    if climb.size == 0:
        raise TopologyError("no graph edge crosses the cut ray inside the search ball")
    heads = np.unique(v[climb])
    base = SHEETS * n
    dist, pred = csgraph.dijkstra(G, directed=True, indices=base + heads, return_predecessors=True)
    head_row = {int(h): k for k, h in enumerate(heads)}
    total = cost[climb] + dist[[head_row[int(h)] for h in v[climb]], base + u[climb]]
    if not np.any(np.isfinite(total)):
        raise TopologyError("no cycle around the center inside the search ball")
    # ties: cheapest, then fewest vertices, then smallest tail id
    best = int(np.lexsort((u[climb], total))[0])
    e_u, e_v = int(u[climb[best]]), int(v[climb[best]])
    row = head_row[e_v]
    node = base + e_u
    path = []
    while node != base + e_v:
        path.append(node % n)
        node = int(pred[row, node])
        assert node >= 0, "broken predecessor chain"
    path.append(e_v)
    cycle = path[::-1]          # e_v ... e_u, closed by the climbing edge e_u -> e_v
    cycles = decompose_cycles(cycle)
    cycle = max(cycles, key=len) if len(cycles) > 1 else cycle
    loop = DiscreteLoop.from_points(space, cycle)
    w = _winding(space, loop.points, z)
    if abs(w) != 1:
        raise TopologyError(f"minimizer winds {w} times; expected one")
    sigma = loop_cost(loop, model)
    assert sigma <= sigma_warm * (1 + 1e-9), "minimizer costs more than the warm start"

    l = loop.length
    d0 = float(model.dz[loop.points].min())
    bounds = {"length": l, "sigma": sigma, "d0": d0, "length_le_sigma": l <= sigma * (1 + 1e-12),
              "d0_upper": 2 * Lam * L * l, "d0_upper_ok": d0 < 2 * Lam * L * l}
    diagnostics = []
    if C0 is not None:
        lower = R / (320.0 * C0 * Lam * L)
        bounds.update(d0_lower=lower, d0_lower_ok=d0 >= lower)
        if d0 < lower:
            diagnostics.append(f"loop comes within {d0:.4g} of the center, below {lower:.4g}")
    if not bounds["d0_upper_ok"]:
        diagnostics.append("distance to the center exceeds 2 Lam L times the loop length")
    return MinimizedLoop(loop, sigma, w, float(b0_radius), bounds, diagnostics)


# ---------------------------------------------------------------------------
# chord-arc certification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChordArcCertificate:
    lam: float
    worst_pair: tuple
    dist_center: float | None
    diam: float
    winding: int | None
    length: float

    def to_dict(self):
        return {"lambda": self.lam, "worst_pair": list(self.worst_pair), "dist_center": self.dist_center,
                "diam": self.diam, "winding": self.winding, "length": self.length}


def certify_chord_arc(loop, space: FiniteMetricSpace | None = None, z=None) -> ChordArcCertificate:
    """Exact chord-arc constant ``max min(len J1, len J2) / d`` over all vertex pairs.

    ``loop`` is a :class:`DiscreteLoop` (with ``space``) or an ``(n, k)``
    coordinate array with Euclidean edges.
    """
    d, ids = loop_distance_matrix(loop, space)
    n = len(d)
    if n < 3:
        raise PreconditionError("chord-arc certification needs at least 3 vertices")
    if isinstance(loop, DiscreteLoop):
        edges = loop.edge_lengths
    else:
        edges = d[np.arange(n), (np.arange(n) + 1) % n]
    pos = np.r_[0.0, np.cumsum(edges)[:-1]]
    total = float(edges.sum())
    iu = np.triu_indices(n, k=1)
    j1 = pos[iu[1]] - pos[iu[0]]
    ratio = np.minimum(j1, total - j1) / d[iu]
    k = int(np.argmax(ratio))
    lam = max(1.0, float(ratio[k]))
    dist_center = winding = None
    if space is not None and z is not None:
        dist_center = float(space.cross([z], ids).min())
        if space.chart is not None:
            winding = _winding(space, ids, z)
    return ChordArcCertificate(lam, (int(ids[iu[0][k]]), int(ids[iu[1][k]])), dist_center, float(d.max()),
                               winding, total)


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HypothesisConstants:
    """Measured upstream constants: LLC ``Lam``, quasiconvexity ``L``, Assouad ``(Q, D)``, Ahlfors ``C``."""

    Lam: float = 1.0
    L: float = 1.0
    Q: float = 2.0
    D: float = 4.0
    C: float = 4.0

    def to_dict(self):
        return {"Lambda": self.Lam, "L": self.L, "Q": self.Q, "D": self.D, "C": self.C}


@dataclass(frozen=True)
class ChordArcResult:
    loop: DiscreteLoop
    certificate: ChordArcCertificate
    polygon: InitialPolygon
    minimized: MinimizedLoop
    constants: dict
    checks: dict
    diagnostics: list = field(default_factory=list)

    def to_dict(self):
        return {"loop": self.loop.to_dict(), "certificate": self.certificate.to_dict(),
                "polygon": self.polygon.to_dict(), "minimized": self.minimized.to_dict(),
                "constants": self.constants, "checks": self.checks, "diagnostics": list(self.diagnostics)}


def chart_reach(space: FiniteMetricSpace, z: int, pm=None) -> float:
    """Graph distance from ``z`` to the nearest point on the boundary of the charted sample.

    An isolated ``z`` (a center sitting in a hole) measures with the base
    metric instead, as the loop cost model does.

    Boundary points are those with a chart direction in which no neighbor
    lies within the connection radius (convex-hull vertices plus points next
    to holes of the sample).
    """
    _require_chart(space)
    pm = path_metric(space) if pm is None else pm
    boundary = boundary_points(space)
    boundary = boundary[boundary != z]
    dz = center_distances(pm, z)
    return float(dz[boundary].min()) if boundary.size else float(dz[np.isfinite(dz)].max())


def boundary_points(space: FiniteMetricSpace, n_dirs=12) -> np.ndarray:
    """Points with an empty angular sector of neighbors (``2 pi / n_dirs * 3`` wide) in the chart."""
    g = space.graph.tocoo()
    d = space.chart[g.col] - space.chart[g.row]
    ang = np.mod(np.arctan2(d[:, 1], d[:, 0]), 2 * np.pi)
    sector = (ang / (2 * np.pi) * n_dirs).astype(np.int64) % n_dirs
    occ = np.zeros((space.n, n_dirs), dtype=bool)
    occ[g.row, sector] = True
    # three consecutive empty sectors mark an exposed side
    empty = ~occ
    run = empty & np.roll(empty, 1, axis=1) & np.roll(empty, 2, axis=1)
    return np.flatnonzero(run.any(axis=1))


def chord_arc_pipeline(space: FiniteMetricSpace, z: int, R: float, constants: HypothesisConstants | None = None,
                       R0: float | None = None, guard=True, b0_radius=None, ball_divisor=16.0,
                       pm=None) -> ChordArcResult:
    """First polygon, sigma minimization and chord-arc certification around ``z`` at scale ``R``.

    The scale guard ``R <= R0 / C1`` with ``C1 = 320 C0 (Lam L + 2)`` is
    enforced unless ``guard`` is false, in which case a warning is issued and
    the search ball defaults to the full chart reach ``R0``.
    """
    _require_chart(space)
    k = constants or HypothesisConstants()
    pm = path_metric(space) if pm is None else pm
    R0 = chart_reach(space, z, pm) if R0 is None else float(R0)
    LL = k.Lam * k.L
    diagnostics: list = []

    polygon = initial_polygon(space, z, R, k.Lam, k.L, pm)
    C0 = polygon.C0
    C1 = 320.0 * C0 * (LL + 2.0)
    if R > R0 / C1:
        msg = f"scale R={R:.4g} exceeds the guard R0/C1={R0 / C1:.4g} (C1={C1:.4g})"
        if guard:
            raise GuardError(msg)
        warnings.warn(msg + "; continuing with the guard disabled", stacklevel=2)
        diagnostics.append(msg + " (guard disabled)")
        if b0_radius is None:
            b0_radius = R0
    diagnostics.extend(polygon.diagnostics)

    mini = minimize_loop(space, z, R, polygon.loop, b0_radius=b0_radius, R0=R0, Lam=k.Lam, L=k.L, C0=C0,
                         ball_divisor=ball_divisor, pm=pm)
    diagnostics.extend(mini.diagnostics)
    loop = mini.loop
    cert = certify_chord_arc(loop, space, z)

    dz = center_distances(pm, z)
    dist_d = cert.dist_center
    diam_d = cert.diam
    C2 = max(R / dist_d, dist_d / R, R / diam_d, diam_d / R)
    dist_p = float(dz[loop.points].min())
    diam_p = float(np.max(csgraph.dijkstra(pm.graph, directed=False, indices=loop.points)[:, loop.points]))
    a = dist_p / R
    dist_diam_ok = diam_p >= a * R / LL * (1 - 1e-12)
    if not dist_diam_ok:
        diagnostics.append("loop diameter below dist / (Lam L)")
    ceiling = (6400.0 * C0 ** 2 * LL * (LL + 1.0)) ** 2
    if cert.lam > ceiling:
        diagnostics.append(f"chord-arc constant {cert.lam:.4g} above the a-priori ceiling {ceiling:.4g}")
    checks = {
        "winding": cert.winding,
        "dist_over_R": dist_d / R,
        "diam_over_R": diam_d / R,
        "sigma_over_4piR": mini.sigma / (4 * math.pi * R),
        "sigma_le_warm": mini.sigma <= polygon.sigma * (1 + 1e-9),
        "dist_diam": dist_diam_ok,
        "lambda_ceiling": ceiling,
        "lambda_below_ceiling": cert.lam <= ceiling,
    }
    consts = {"C0": C0, "C1": C1, "C2": C2, "lambda": cert.lam, "R": R, "R0": R0, "guard": bool(guard),
              "b0_radius": mini.b0_radius, "ball_divisor": ball_divisor, **k.to_dict()}
    return ChordArcResult(loop, cert, polygon, mini, consts, checks, diagnostics)


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    interior: np.ndarray
    boundary: np.ndarray
    checks: dict
    diagnostics: list = field(default_factory=list)

    @property
    def closure(self) -> np.ndarray:
        return np.union1d(self.interior, self.boundary)

    def to_dict(self):
        return {"interior": [int(v) for v in self.interior], "boundary": [int(v) for v in self.boundary],
                "checks": self.checks, "diagnostics": list(self.diagnostics)}


def extract_domain(space: FiniteMetricSpace, loop: DiscreteLoop, z: int, R: float, C2: float, Lam=1.0) -> Domain:
    """Points enclosed by the loop (nonzero chart winding); loop vertices form the boundary.

    Raises :class:`TopologyError` when ``z`` is not enclosed or the inclusions
    ``B(z, R / (2 Lam C2)) in Omega in B(z, C2 (4 Lam + 2) R)`` fail.
    """
    _require_chart(space)
    boundary = np.unique(loop.points)
    wind = winding_field(space.chart[loop.points], space.chart)
    on = np.zeros(space.n, dtype=bool)
    on[boundary] = True
    interior = np.flatnonzero((wind != 0) & ~on)
    if z in set(boundary.tolist()) or z not in set(interior.tolist()):
        raise TopologyError("the loop does not enclose the center")
    dz = space.distances_from(z)
    inner_r = R / (2.0 * Lam * C2)
    outer_r = C2 * (4.0 * Lam + 2.0) * R
    inner_ok = bool(np.all(np.isin(np.flatnonzero(dz < inner_r), interior)))
    closure = np.union1d(interior, boundary)
    outer_ok = bool(np.all(dz[closure] < outer_r))
    if not inner_ok:
        raise TopologyError(f"B(z, {inner_r:.4g}) is not inside the domain")
    if not outer_ok:
        raise TopologyError(f"domain leaves B(z, {outer_r:.4g})")
    diagnostics = []
    reach = chart_reach(space, z)
    covered = reach >= outer_r
    if not covered:
        diagnostics.append(f"chart reach {reach:.4g} is smaller than the envelope radius {outer_r:.4g}")
    checks = {"inner_radius": inner_r, "outer_radius": outer_r, "inner_ok": inner_ok, "outer_ok": outer_ok,
              "chart_covers_envelope": covered, "n_interior": int(interior.size)}
    return Domain(interior, boundary, checks, diagnostics)


@dataclass(frozen=True)
class DomainReport:
    passed: bool
    checks: dict
    llc: dict | None
    ahlfors: dict | None
    porosity: dict | None
    diagnostics: list = field(default_factory=list)

    def to_dict(self):
        return {"passed": self.passed, "checks": self.checks, "llc": self.llc, "ahlfors": self.ahlfors,
                "porosity": self.porosity, "diagnostics": list(self.diagnostics)}


def verify_domain(space: FiniteMetricSpace, domain: Domain, loop: DiscreteLoop, Lam: float, lam: float, C_K: float,
                  window=None, budget: Budgets | None = None) -> DomainReport:
    """LLC, Ahlfors regularity and boundary porosity of the closed domain, against the
    bounds ``4 Lam (4 lam + 1)`` and ``64 C_K (C_por lambda')**2`` built from upstream constants."""
    closure = domain.closure
    if domain.interior.size == 0:
        return DomainReport(True, {"vacuous": True}, None, None, None, ["empty domain: vacuous pass"])
    sub = space.subspace(closure)
    local = {int(p): k for k, p in enumerate(closure)}
    gamma = np.array([local[int(p)] for p in loop.points], dtype=np.intp)
    lo = 2.0 * sub.spacing
    hi = sub.diam / 2.0
    window = (lo, hi) if window is None else window
    diagnostics = []
    try:
        check_window(window)
    except PreconditionError as exc:
        return DomainReport(False, {"window": list(window)}, None, None, None, [f"domain too small: {exc}"])

    llc = llc_constants(sub, window=window, budget=budget)
    lam_prime = llc.lam
    llc_bound = 4.0 * Lam * (4.0 * lam + 1.0)
    reg = ahlfors_regularity(sub, window=window, budget=budget) if sub.weight2 is not None else None
    try:
        por = porosity_constant(sub, gamma, window=window)
        C_por = por.C
    except Exception as exc:  # NotPorousError carries the witness
        por, C_por = None, math.inf
        diagnostics.append(f"boundary porosity failed: {exc}")
    tp = three_point_constant(loop, space)
    ahlfors_bound = 64.0 * C_K * (C_por * lam_prime) ** 2
    checks = {
        "lambda_prime": lam_prime,
        "llc_bound": llc_bound,
        "llc_ok": lam_prime <= llc_bound,
        "C_ahlfors": None if reg is None else reg.C,
        "ahlfors_bound": ahlfors_bound,
        "ahlfors_ok": None if reg is None else reg.C <= ahlfors_bound,
        "C_porosity": C_por,
        "three_point": tp.lam,
        "window": list(window),
    }
    if not checks["llc_ok"]:
        diagnostics.append(f"LLC constant {lam_prime:.4g} exceeds {llc_bound:.4g}")
    if reg is not None and not checks["ahlfors_ok"]:
        diagnostics.append(f"Ahlfors constant {reg.C:.4g} exceeds {ahlfors_bound:.4g}")
    passed = bool(checks["llc_ok"] and checks["ahlfors_ok"] is not False and por is not None)
    return DomainReport(passed, checks, llc.to_dict(), None if reg is None else reg.to_dict(),
                        None if por is None else por.to_dict(), diagnostics)
