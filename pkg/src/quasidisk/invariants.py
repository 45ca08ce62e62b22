"""Estimators and certifiers for the geometric hypotheses: Assouad dimension,
Ahlfors 2-regularity, linear local connectivity, the three-point condition,
porosity, winding numbers and loop closeness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .arcs import DiscreteLoop, minimax_radius, subarc_diameters
from .errors import ChartError, NotPorousError, PreconditionError, ResolutionError, TopologyError
from .space import FiniteMetricSpace, _restrict, maximal_net

AHLFORS_FLAG = 8.0
POROSITY_GRID = tuple(math.sqrt(2.0) ** k for k in range(13))


# ---------------------------------------------------------------------------
# sampling helpers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Budgets:
    """Sampling limits; recorded in every report."""

    max_centers: int = 48
    radii_per_octave: int = 8
    max_pairs: int = 100_000
    seed: int = 0

    def to_dict(self):
        return {"max_centers": self.max_centers, "radii_per_octave": self.radii_per_octave,
                "max_pairs": self.max_pairs, "seed": self.seed}


def default_window(space: FiniteMetricSpace, subset=None):
    """Scales ``[2 * spacing, diam / 4]`` on which estimates are trusted."""
    if subset is None:
        diam = space.diam
    else:
        subset = np.asarray(subset, dtype=np.intp)
        diam = float(space.pairwise(subset).max()) if subset.size > 1 else 0.0
    return 2.0 * space.spacing, diam / 4.0


def check_window(window, min_octaves=1.0):
    lo, hi = float(window[0]), float(window[1])
    if not (lo > 0 and hi >= lo * 2.0 ** min_octaves * (1 - 1e-12)):
        raise PreconditionError(f"scale window [{lo:.4g}, {hi:.4g}] spans less than one octave")
    return lo, hi


def radius_grid(window, per_octave):
    lo, hi = window
    k = int(math.floor(per_octave * math.log2(hi / lo) + 1e-9))
    return lo * 2.0 ** (np.arange(k + 1) / per_octave)


def sample_centers(space: FiniteMetricSpace, subset, budget: Budgets):
    """Centers drawn from ``subset`` in canonical (label-independent) order."""
    order = space.canonical_order
    if subset is not None:
        order = order[np.isin(order, subset)]
    if len(order) <= budget.max_centers:
        return order
    rng = np.random.default_rng(budget.seed)
    return order[np.sort(rng.choice(len(order), size=budget.max_centers, replace=False))]


# ---------------------------------------------------------------------------
# Assouad dimension
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AssouadEstimate:
    Q: float
    D: float
    window: tuple
    n_samples: int
    worst: tuple | None
    budgets: dict = field(default_factory=dict)

    def to_dict(self):
        return {"Q": self.Q, "D": self.D, "window": list(self.window), "n_samples": self.n_samples,
                "worst": None if self.worst is None else list(self.worst), "budgets": dict(self.budgets)}


def assouad_dimension(space: FiniteMetricSpace, subset=None, window=None, budget: Budgets | None = None,
                      max_ratio_octaves=4) -> AssouadEstimate:
    """Fit ``N(x, r, eps) ~ D (r / eps) ** Q`` over sampled balls and scale pairs in the window.

    ``N`` counts the members of one greedy maximal ``eps``-net of the subset
    that fall in the closed ball ``B(x, r)``: an ``eps``-separated subset of
    the ball whose ``2 eps``-balls cover it.  Counting members of a global net
    avoids the boundary inflation of netting each ball separately.  ``Q`` is
    the least-squares slope of ``log N`` against ``log(r / eps)`` over ratios
    from 2 to ``2 ** max_ratio_octaves``; ``D`` is the largest factor
    ``N (eps / r) ** Q``.
    """
    budget = budget or Budgets(max_centers=48)
    pts = np.arange(space.n) if subset is None else np.unique(np.asarray(subset, dtype=np.intp))
    if pts.size <= 1:
        return AssouadEstimate(0.0, 1.0, (0.0, 0.0), 0, None, budget.to_dict())
    window = default_window(space, None if subset is None else pts) if window is None else window
    lo, hi = check_window(window)
    order = space.canonical_order
    order = order[np.isin(order, pts)]
    radii = radius_grid((lo, hi), 2)
    centers = sample_centers(space, pts, budget)

    nets = {}
    rows = []
    for x in centers:
        dx = space.distances_from(x)
        for r in radii:
            for j in range(2, 2 * max_ratio_octaves + 1):
                eps = r / 2.0 ** (j / 2)
                if eps < lo * (1 - 1e-12):
                    break
                key = round(math.log2(eps / lo) * 2)
                if key not in nets:
                    nets[key] = maximal_net(space, eps, subset=pts, order=order).members
                count = int(np.count_nonzero(dx[nets[key]] <= r))
                rows.append((int(x), float(r), float(eps), count))
    if not rows:
        raise PreconditionError("no (r, eps) pairs fit in the window")
    t = np.array([[math.log(r / e), math.log(c)] for _, r, e, c in rows])
    A = np.c_[t[:, 0], np.ones(len(t))]
    (slope, _), *_ = np.linalg.lstsq(A, t[:, 1], rcond=None)
    Q = max(0.0, float(slope))
    factors = np.exp(t[:, 1] - Q * t[:, 0])
    k = int(np.argmax(factors))
    return AssouadEstimate(Q, float(factors[k]), (lo, hi), len(rows), rows[k], budget.to_dict())


# ---------------------------------------------------------------------------
# Ahlfors regularity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegularityReport:
    window: tuple
    C: float
    table: list
    per_radius: list
    worst: tuple | None
    degenerate: bool
    scale_dependent: bool
    budgets: dict
    Q: float | None = None
    D: float | None = None
    measure: str = "weights"

    def to_dict(self):
        return {"window": list(self.window), "C_ahlfors": self.C, "per_radius": self.per_radius,
                "worst": None if self.worst is None else list(self.worst), "degenerate": self.degenerate,
                "scale_dependent_failure": self.scale_dependent, "budgets": dict(self.budgets),
                "Q": self.Q, "D": self.D, "measure": self.measure, "n_table": len(self.table)}


def ahlfors_regularity(space: FiniteMetricSpace, subset=None, window=None, budget: Budgets | None = None,
                       proxy_eps=None, flag=AHLFORS_FLAG) -> RegularityReport:
    """Two-sided comparison of closed-ball measure with ``r**2`` over sampled balls.

    The measure is the sum of ``weight2`` or, without weights, the covering
    proxy at scale ``proxy_eps``.  ``C`` is the largest of ``mu / r**2`` and
    ``r**2 / mu``; a radius whose constant exceeds ``flag`` marks a
    scale-dependent failure and a zero-measure ball gives ``C = inf``.
    """
    budget = budget or Budgets()
    pts = np.arange(space.n) if subset is None else np.unique(np.asarray(subset, dtype=np.intp))
    if space.weight2 is None and proxy_eps is None:
        raise PreconditionError("need weight2 or a proxy scale for the area measure")
    window = default_window(space, None if subset is None else pts) if window is None else window
    lo, hi = check_window(window)
    radii = radius_grid((lo, hi), budget.radii_per_octave)
    centers = sample_centers(space, pts, budget)
    order = space.canonical_order
    order = order[np.isin(order, pts)]

    table = []
    per_r = np.ones(len(radii))
    worst, C = None, 1.0
    for x in centers:
        dx = space.cross([x], pts)[0]
        if space.weight2 is not None:
            srt = np.argsort(dx, kind="stable")
            cum = np.cumsum(space.weight2[pts][srt])
            k = np.searchsorted(dx[srt], radii * (1 + 1e-12), side="right")
            mu = np.where(k > 0, cum[np.maximum(k - 1, 0)], 0.0)
        else:
            mu = np.array([len(maximal_net(space, proxy_eps, subset=pts[dx <= r],
                                           order=order[np.isin(order, pts[dx <= r])]).members) * proxy_eps ** 2
                           for r in radii])
        with np.errstate(divide="ignore"):
            ratio = mu / radii ** 2
            const = np.maximum(ratio, np.where(ratio > 0, 1.0 / ratio, np.inf))
        for r, m, c in zip(radii, mu, ratio):
            table.append((int(x), float(r), float(m), float(c)))
        per_r = np.maximum(per_r, const)
        k = int(np.argmax(const))
        if worst is None or const[k] > C:
            C = max(C, float(const[k]))
            worst = (int(x), float(radii[k]))
    per_radius = [(float(r), float(c)) for r, c in zip(radii, per_r)]
    degenerate = not math.isfinite(C) or C > flag
    scale_dependent = bool(np.any(per_r > flag))
    return RegularityReport((lo, hi), float(C), table, per_radius, worst, degenerate, scale_dependent,
                            budget.to_dict(), measure="weights" if space.weight2 is not None else "covering")


# ---------------------------------------------------------------------------
# linear local connectivity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LLCReport:
    lam1: float
    lam2: float
    witness1: tuple | None
    witness2: tuple | None
    window: tuple
    n_samples: int
    n_guarded: int
    budgets: dict

    @property
    def lam(self):
        return max(self.lam1, self.lam2)

    def to_dict(self):
        return {"lambda1": self.lam1, "lambda2": self.lam2, "witness1": self.witness1, "witness2": self.witness2,
                "window": list(self.window), "n_samples": self.n_samples, "n_guarded": self.n_guarded,
                "budgets": dict(self.budgets),
                "caveat": "LLC constants stand in for the contractibility constant; the two differ by "
                          "unquantified factors in general"}


def maximin_radius(space: FiniteMetricSpace, x: int, graph, keep):
    """For each vertex ``a``: the largest ``c`` such that ``a`` joins the farthest vertex from
    ``x`` through vertices at distance ``>= c`` from ``x`` (0 when impossible)."""
    r = space.distances_from(x)
    coo = sparse.triu(_restrict(graph, keep), k=1).tocoo()
    cap = np.minimum(r[coo.row], r[coo.col])
    top = float(r[keep].max())
    w = (top - cap) + 1e-12 * max(top, 1e-300)
    tree = csgraph.minimum_spanning_tree(sparse.coo_matrix((w, (coo.row, coo.col)), shape=graph.shape))
    cand = np.flatnonzero(keep)
    root = int(cand[np.argmax(r[cand])])
    order, pred = csgraph.breadth_first_order(tree, root, directed=False, return_predecessors=True)
    out = np.zeros(space.n)
    out[root] = r[root]
    for v in order[1:]:
        out[v] = min(out[pred[v]], r[v])
    return out


def llc_constants(space: FiniteMetricSpace, subset=None, window=None, budget: Budgets | None = None,
                  graph=None) -> LLCReport:
    """Sampled LLC constants of ``subset`` (default: the whole space).

    ``lam1``: points of ``B(x, r)`` joined inside ``B(x, lam1 r)``.  Since ``x``
    itself lies in the ball, the worst pair always involves ``x``, so the exact
    value per ``(x, r)`` is the largest minimax radius from ``x`` over the ball.
    ``lam2``: points outside ``B(x, r)`` joined outside ``B(x, r / lam2)``;
    only evaluated when the ambient ball lies inside ``subset``.
    """
    budget = budget or Budgets(max_centers=40)
    g = space.graph if graph is None else graph
    pts = np.arange(space.n) if subset is None else np.unique(np.asarray(subset, dtype=np.intp))
    keep = np.zeros(space.n, dtype=bool)
    keep[pts] = True
    window = default_window(space, None if subset is None else pts) if window is None else window
    lo, hi = check_window(window)
    radii = radius_grid((lo, hi), budget.radii_per_octave)
    centers = sample_centers(space, pts, budget)

    lam1, lam2, w1, w2, n_samples, n_guarded = 1.0, 1.0, None, None, 0, 0
    for x in centers:
        x = int(x)
        dx = space.distances_from(x)
        t = minimax_radius(space, x, g, mask=keep)
        cap = maximin_radius(space, x, g, keep) if pts.size > 1 else None
        for r in radii:
            n_samples += 1
            ball = (dx <= r) & keep
            k = int(np.flatnonzero(ball)[np.argmax(t[ball])])
            v1 = max(1.0, t[k] / r)
            if v1 > lam1:
                lam1, w1 = v1, (x, float(r), k)
            if np.any((dx < r) & ~keep):
                n_guarded += 1
                continue
            outside = np.flatnonzero((dx >= r) & keep)
            if outside.size < 2:
                continue
            k2 = int(outside[np.argmin(cap[outside])])
            c = cap[k2]
            v2 = math.inf if c <= 0 else max(1.0, r / c)
            if v2 > lam2:
                lam2, w2 = v2, (x, float(r), k2)
    return LLCReport(float(lam1), float(lam2), w1, w2, (lo, hi), n_samples, n_guarded, budget.to_dict())


# ---------------------------------------------------------------------------
# three-point condition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThreePointCertificate:
    lam: float
    worst_pair: tuple

    def to_dict(self):
        return {"lambda_prime": self.lam, "worst_pair": list(self.worst_pair)}


def loop_distance_matrix(loop, space=None) -> tuple[np.ndarray, np.ndarray]:
    """Distance matrix of loop vertices plus their labels.

    ``loop`` is a :class:`DiscreteLoop` or id array (needs ``space``) or an
    ``(n, k)`` coordinate array measured with the Euclidean norm.
    """
    if isinstance(loop, DiscreteLoop):
        loop = loop.points
    arr = np.asarray(loop)
    if space is not None:
        ids = arr.astype(np.intp)
        return space.pairwise(ids), ids
    if arr.ndim != 2:
        raise PreconditionError("coordinate loops must be (n, k) arrays")
    diff = arr[:, None, :] - arr[None, :, :]
    return np.sqrt((diff ** 2).sum(-1)), np.arange(len(arr))


def complementary_diameters(d: np.ndarray):
    """``diam J1`` (vertices i..j) and ``diam J2`` (j..n-1, 0..i) for all ``i < j``."""
    n = len(d)
    inner = subarc_diameters(d)
    # prefix diameters 0..i and suffix diameters j..n-1
    pre = inner[0, :]
    suf = inner[:, n - 1]
    # cross[i, j] = max_{b <= i, a >= j} d[b, a]
    cross = np.maximum.accumulate(d, axis=0)
    cross = np.maximum.accumulate(cross[:, ::-1], axis=1)[:, ::-1]
    outer = np.maximum(np.maximum(pre[:, None], suf[None, :]), cross)
    return inner, outer


def three_point_constant(loop, space=None) -> ThreePointCertificate:
    """Exact ``max min(diam J1, diam J2) / d(x, y)`` over all vertex pairs."""
    d, ids = loop_distance_matrix(loop, space)
    n = len(d)
    if n < 4:
        raise PreconditionError("three-point constant needs a loop with at least 4 vertices")
    inner, outer = complementary_diameters(d)
    iu = np.triu_indices(n, k=1)
    ratio = np.minimum(inner[iu], outer[iu]) / d[iu]
    k = int(np.argmax(ratio))
    i, j = int(iu[0][k]), int(iu[1][k])
    return ThreePointCertificate(max(1.0, float(ratio[k])), (int(ids[i]), int(ids[j])))


# ---------------------------------------------------------------------------
# porosity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PorosityReport:
    C: float
    required: float
    witnesses: list
    worst: tuple | None
    window: tuple
    budgets: dict

    def to_dict(self):
        return {"C_porosity": self.C, "required": self.required, "worst": self.worst,
                "window": list(self.window), "n_witnesses": len(self.witnesses), "budgets": dict(self.budgets)}


def porosity_constant(space: FiniteMetricSpace, Y, window=None, budget: Budgets | None = None,
                      grid=POROSITY_GRID) -> PorosityReport:
    """Smallest grid constant ``C`` with a ball ``B(x, r / C)`` inside ``B(y, r)`` and off ``Y``.

    For each sampled ``(y, r)`` the best center maximizes
    ``f(x) = min(dist(x, Y), dist(x, outside of B(y, r)))`` over ``B(y, r)``;
    the open ball ``B(x, rho)`` avoids ``Y`` and the outside exactly when
    ``rho <= f(x)``.
    """
    budget = budget or Budgets(max_centers=40, radii_per_octave=4)
    Y = np.unique(np.asarray(Y, dtype=np.intp))
    if Y.size == 0:
        raise PreconditionError("Y must be nonempty")
    window = default_window(space) if window is None else window
    lo, hi = check_window(window)
    radii = radius_grid((lo, hi), budget.radii_per_octave)
    to_Y = space.dist_to_set(Y)
    free = np.flatnonzero(to_Y > 0)
    centers = sample_centers(space, Y, budget)

    required, worst, witnesses = 1.0, None, []
    for y in centers:
        dy = space.distances_from(y)
        for r in radii:
            cand = free[dy[free] < r]
            out = np.flatnonzero(dy >= r)
            if cand.size == 0:
                raise NotPorousError(f"no point of B({y}, {r:.4g}) avoids Y", witness=(int(y), float(r)))
            f = to_Y[cand].copy()
            if out.size:
                _, to_out = space.nearest(out, cand)
                f = np.minimum(f, to_out)
            k = int(np.argmax(f))
            need = r / f[k]
            witnesses.append((int(y), float(r), int(cand[k]), float(f[k])))
            if need > required:
                required, worst = float(need), (int(y), float(r), int(cand[k]))
    ok = [c for c in grid if c >= required * (1 - 1e-12)]
    if not ok:
        raise NotPorousError(f"not porous at tested resolution: need C={required:.3g} > {grid[-1]:.3g}",
                             witness=worst)
    return PorosityReport(float(ok[0]), required, witnesses, worst, (lo, hi), budget.to_dict())


def recheck_porosity_witness(space, Y, y, r, x, C) -> bool:
    """Replay one witness: all points within ``r / C`` of ``x`` lie in ``B(y, r)`` and off ``Y``."""
    near = np.flatnonzero(space.distances_from(x) < r / C)
    return bool(np.all(space.distances_from(y)[near] < r) and not np.isin(near, Y).any())


# ---------------------------------------------------------------------------
# winding numbers
# ---------------------------------------------------------------------------

def turning_angles(uv: np.ndarray, z) -> np.ndarray:
    """Signed angles subtended at ``z`` by consecutive loop edges (closing edge included)."""
    p = np.asarray(uv, dtype=float) - np.asarray(z, dtype=float)
    q = np.roll(p, -1, axis=0)
    cross = p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]
    dot = (p * q).sum(axis=1)
    return np.arctan2(cross, dot)


def winding_number(uv, z, tol=0.01) -> int:
    """Index of the closed polygon ``uv`` (chart coordinates) about the chart point ``z``."""
    uv = np.asarray(uv, dtype=float)
    if uv.ndim != 2 or uv.shape[1] != 2 or len(uv) < 2:
        raise PreconditionError("loop must be an (n >= 2, 2) array of chart points")
    if np.any(np.all(uv == np.asarray(z, dtype=float), axis=1)):
        raise PreconditionError("z lies on the loop")
    ang = turning_angles(uv, z)
    if np.any(np.abs(ang) >= np.pi - 1e-9):
        k = int(np.argmax(np.abs(ang)))
        raise ResolutionError(f"edge {k} subtends an angle >= pi at z; loop resolution too coarse near z")
    total = ang.sum() / (2 * np.pi)
    w = int(round(total))
    if abs(total - w) > tol:
        raise ResolutionError(f"winding residual {abs(total - w):.3g} exceeds {tol}")
    return w


def loop_winding(space: FiniteMetricSpace, loop, z) -> int:
    """Winding number of a loop of point ids about point ``z`` (an id) or a chart point."""
    if space.chart is None:
        raise ChartError("winding numbers need a chart")
    pts = loop.points if isinstance(loop, DiscreteLoop) else np.asarray(loop, dtype=np.intp)
    zc = space.chart[int(z)] if np.ndim(z) == 0 else np.asarray(z, dtype=float)
    return winding_number(space.chart[pts], zc)


def winding_field(uv: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Winding numbers of a polygon about many query points (no resolution checks).

    Points on the polygon itself get an undefined value; callers mask them.
    """
    uv = np.asarray(uv, dtype=float)
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    total = np.zeros(len(queries))
    for a, b in zip(uv, np.roll(uv, -1, axis=0)):
        pa = a - queries
        pb = b - queries
        total += np.arctan2(pa[:, 0] * pb[:, 1] - pa[:, 1] * pb[:, 0], (pa * pb).sum(axis=1))
    return np.rint(total / (2 * np.pi)).astype(int)


def polyline_distance(uv: np.ndarray, queries: np.ndarray, closed=True) -> np.ndarray:
    """Euclidean distance from each query point to the polygon through ``uv``."""
    a = np.asarray(uv, dtype=float)
    b = np.roll(a, -1, axis=0) if closed else a[1:]
    a = a if closed else a[:-1]
    q = np.atleast_2d(np.asarray(queries, dtype=float))
    best = np.full(len(q), np.inf)
    for p0, p1 in zip(a, b):
        e = p1 - p0
        ee = float(e @ e)
        s = np.zeros(len(q)) if ee == 0 else np.clip(((q - p0) @ e) / ee, 0.0, 1.0)
        best = np.minimum(best, np.hypot(*(q - p0 - s[:, None] * e).T))
    return best


# ---------------------------------------------------------------------------
# loop closeness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosenessResult:
    passed: bool
    violation: tuple | None
    tube: float
    checked: list
    excluded: list

    def to_dict(self):
        return {"passed": self.passed, "violation": self.violation, "tube": self.tube,
                "checked": self.checked, "excluded": self.excluded}


def certify_loop_closeness(alpha, beta, delta: float, Lam: float, queries=(), alpha_index=None,
                           beta_index=None) -> ClosenessResult:
    """Check that two chart loops are ``delta``-close at matched parameters.

    Hypotheses: ``|alpha(t_i) - beta(t_i)| <= delta`` and every parameter
    segment of either loop has diameter ``<= delta``.  When they hold, both
    loops must wind equally about every query point farther than
    ``2 Lam delta (Lam + 1)`` from ``beta``; a mismatch raises
    :class:`TopologyError`.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    ia = np.arange(len(alpha)) if alpha_index is None else np.asarray(alpha_index, dtype=np.intp)
    ib = np.arange(len(beta)) if beta_index is None else np.asarray(beta_index, dtype=np.intp)
    if len(ia) != len(ib):
        raise PreconditionError("matched parameter sets must have equal size")
    tube = 2.0 * Lam * delta * (Lam + 1.0)

    gaps = np.hypot(*(alpha[ia] - beta[ib]).T)
    if np.any(gaps > delta):
        k = int(np.argmax(gaps > delta))
        return ClosenessResult(False, ("pointwise", k, float(gaps[k])), tube, [], [])
    for name, curve, idx in (("alpha", alpha, ia), ("beta", beta, ib)):
        for k, (s, e) in enumerate(zip(idx, np.roll(idx, -1))):
            seg = curve[s:e + 1] if e > s else np.vstack([curve[s:], curve[:e + 1]])
            diff = seg[:, None, :] - seg[None, :, :]
            diam = float(np.sqrt((diff ** 2).sum(-1)).max())
            if diam > delta:
                return ClosenessResult(False, (f"segment-{name}", k, diam), tube, [], [])

    queries = np.atleast_2d(np.asarray(queries, dtype=float)) if len(queries) else np.zeros((0, 2))
    far = polyline_distance(beta, queries) > tube if len(queries) else np.zeros(0, dtype=bool)
    checked, excluded = [], []
    for q, ok in zip(queries, far):
        if not ok:
            excluded.append([float(q[0]), float(q[1])])
            continue
        wa, wb = winding_number(alpha, q), winding_number(beta, q)
        if wa != wb:
            raise TopologyError(f"close loops wind differently about {q.tolist()}: {wa} vs {wb}")
        checked.append([float(q[0]), float(q[1]), wa])
    return ClosenessResult(True, None, tube, checked, excluded)
