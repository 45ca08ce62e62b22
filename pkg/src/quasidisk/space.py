"""Finite metric spaces, nets, neighborhood graphs and the induced path metric.

Every point is addressed by an integer id ``0 .. n-1``.  Distances come either
from coordinates with a named norm or from a dense matrix; in both cases the
returned value is ``scale * base ** exponent`` so that global rescaling and
snowflaking (``exponent < 1``) are cheap views of the same data.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .errors import DisconnectedError, MetricError, PreconditionError

logger = logging.getLogger(__name__)

_NORMS = {"euclidean": 2, "l2": 2, "cityblock": 1, "l1": 1}
_CHUNK = 512


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A finite metric space with optional planar chart and area weights.

    Build instances with :func:`build_space`, which validates the input; the
    constructor itself trusts its arguments.
    """

    coords: np.ndarray | None = None
    matrix: np.ndarray | None = None
    metric: str = "euclidean"
    exponent: float = 1.0
    scale: float = 1.0
    chart: np.ndarray | None = None
    weight2: np.ndarray | None = None
    h: float = 0.0
    ids: tuple | None = None
    meta: dict = field(default_factory=dict)

    # -- basic shape -------------------------------------------------------
    @property
    def n(self) -> int:
        if self.coords is not None:
            return int(self.coords.shape[0])
        return int(self.matrix.shape[0])

    def __len__(self):
        return self.n

    @property
    def has_chart(self) -> bool:
        return self.chart is not None

    # -- distances ---------------------------------------------------------
    def _from_base(self, base):
        if self.exponent != 1.0:
            base = np.power(base, self.exponent)
        return self.scale * base

    def _to_base(self, r):
        r = r / self.scale
        if self.exponent != 1.0:
            r = r ** (1.0 / self.exponent)
        return r

    def cross(self, rows, cols=None) -> np.ndarray:
        """Distance block between two index sets (all points when ``cols`` is None)."""
        rows = np.atleast_1d(np.asarray(rows, dtype=np.intp))
        if self.coords is not None:
            b = self.coords if cols is None else self.coords[np.asarray(cols, dtype=np.intp)]
            metric = "euclidean" if _NORMS[self.metric] == 2 else "cityblock"
            base = cdist(self.coords[rows], b, metric=metric)
        else:
            base = self.matrix[rows] if cols is None else self.matrix[np.ix_(rows, np.asarray(cols, dtype=np.intp))]
        return self._from_base(base)

    def distances_from(self, i) -> np.ndarray:
        return self.cross([i])[0]

    def dist(self, i, j) -> float:
        return float(self.cross([i], [j])[0, 0])

    def pairwise(self, idx) -> np.ndarray:
        return self.cross(idx, idx)

    def dist_to_set(self, subset, points=None) -> np.ndarray:
        """``dist(p, subset)`` for every p in ``points`` (default: all points)."""
        subset = np.asarray(subset, dtype=np.intp)
        if subset.size == 0:
            raise PreconditionError("distance to an empty set")
        if self.coords is not None:
            tree = cKDTree(self.coords[subset])
            q = self.coords if points is None else self.coords[np.asarray(points, dtype=np.intp)]
            base, _ = tree.query(q, p=_NORMS[self.metric])
            return self._from_base(base)
        pts = np.arange(self.n) if points is None else np.asarray(points, dtype=np.intp)
        return self.cross(pts, subset).min(axis=1)

    # -- neighborhoods -----------------------------------------------------
    @cached_property
    def _tree(self):
        return None if self.coords is None else cKDTree(self.coords)

    def ball(self, i, r, closed=True) -> np.ndarray:
        """Ids of points within ``r`` of ``i`` (sorted)."""
        if self._tree is not None:
            cand = np.asarray(self._tree.query_ball_point(self.coords[i], self._to_base(r) * (1 + 1e-12),
                                                          p=_NORMS[self.metric]), dtype=np.intp)
            d = self.cross([i], cand)[0]
        else:
            cand = np.arange(self.n)
            d = self.distances_from(i)
        keep = d <= r if closed else d < r
        return np.sort(cand[keep])

    def radius_graph(self, r) -> sparse.csr_matrix:
        """Symmetric graph joining points at distance ``<= r`` (relative slack 1e-12), weighted by distance."""
        if self._tree is not None:
            pairs = self._tree.query_pairs(self._to_base(r) * (1 + 1e-12), p=_NORMS[self.metric],
                                           output_type="ndarray")
            if len(pairs):
                i, j = pairs[:, 0], pairs[:, 1]
                w = self._from_base(np.linalg.norm(self.coords[i] - self.coords[j], ord=_NORMS[self.metric], axis=1))
                keep = w <= r * (1 + 1e-12)
                i, j, w = i[keep], j[keep], w[keep]
            else:
                i = j = np.zeros(0, dtype=np.intp)
                w = np.zeros(0)
        else:
            full = self._from_base(self.matrix)
            i, j = np.nonzero(np.triu(full <= r * (1 + 1e-12), k=1))
            w = full[i, j]
        g = sparse.coo_matrix((np.r_[w, w], (np.r_[i, j], np.r_[j, i])), shape=(self.n, self.n))
        return g.tocsr()

    @cached_property
    def graph(self) -> sparse.csr_matrix:
        """The ``h``-neighborhood graph."""
        return self.radius_graph(self.h)

    @cached_property
    def nn_distance(self) -> np.ndarray:
        if self.n < 2:
            return np.zeros(self.n)
        if self._tree is not None:
            base, _ = self._tree.query(self.coords, k=2, p=_NORMS[self.metric])
            return self._from_base(base[:, 1])
        d = self._from_base(self.matrix).copy()
        np.fill_diagonal(d, np.inf)
        return d.min(axis=1)

    @cached_property
    def spacing(self) -> float:
        """Median nearest-neighbor distance."""
        return float(np.median(self.nn_distance)) if self.n > 1 else 0.0

    @cached_property
    def diam(self) -> float:
        best = 0.0
        for start in range(0, self.n, _CHUNK):
            block = self.cross(np.arange(start, min(start + _CHUNK, self.n)))
            best = max(best, float(block.max()))
        return best

    @cached_property
    def canonical_order(self) -> np.ndarray:
        """A point order that depends only on the geometry, not on the labels.

        Points are sorted by the sum of their distances to all other points;
        this key is invariant under relabeling and under global rescaling.
        """
        keys = np.empty(self.n)
        for start in range(0, self.n, _CHUNK):
            rows = np.arange(start, min(start + _CHUNK, self.n))
            keys[rows] = self.cross(rows).sum(axis=1)
        return np.argsort(keys, kind="stable")

    def nearest(self, targets, points=None):
        """Nearest target (as a target id) and its distance, for each point."""
        targets = np.asarray(targets, dtype=np.intp)
        pts = np.arange(self.n) if points is None else np.asarray(points, dtype=np.intp)
        if self.coords is not None:
            tree = cKDTree(self.coords[targets])
            base, k = tree.query(self.coords[pts], p=_NORMS[self.metric])
            return targets[k], self._from_base(base)
        block = self.cross(pts, targets)
        k = block.argmin(axis=1)
        return targets[k], block[np.arange(len(pts)), k]

    # -- derived spaces ----------------------------------------------------
    def subspace(self, idx) -> "FiniteMetricSpace":
        """Restriction to ``idx``; the new space records the parent ids in ``meta``."""
        idx = np.asarray(idx, dtype=np.intp)
        sub = replace(
            self,
            coords=None if self.coords is None else self.coords[idx],
            matrix=None if self.matrix is None else self.matrix[np.ix_(idx, idx)],
            chart=None if self.chart is None else self.chart[idx],
            weight2=None if self.weight2 is None else self.weight2[idx],
            ids=None if self.ids is None else tuple(self.ids[k] for k in idx),
            meta={**self.meta, "parent_ids": idx},
        )
        return sub

    def rescaled(self, s: float) -> "FiniteMetricSpace":
        """All distances multiplied by ``s`` (areas by ``s**2``)."""
        return replace(self, scale=self.scale * s, h=self.h * s,
                       weight2=None if self.weight2 is None else self.weight2 * s * s,
                       meta=dict(self.meta))

    def permuted(self, perm) -> "FiniteMetricSpace":
        """Relabeled copy: new point ``k`` is old point ``perm[k]``."""
        perm = np.asarray(perm, dtype=np.intp)
        out = self.subspace(perm)
        out.meta.pop("parent_ids", None)
        return out


def audit_triangle(space: FiniteMetricSpace, max_triples=100_000, full_below=300, rtol=1e-9, seed=0):
    """Check the triangle inequality; return ``(ok, worst_triple, worst_excess)``.

    Below ``full_below`` points every triple is checked, otherwise a uniform
    sample of ``max_triples`` triples.
    """
    n = space.n
    if n < 3:
        return True, None, 0.0
    if n < full_below:
        d = space.pairwise(np.arange(n))
        worst, triple = 0.0, None
        for k in range(n):
            excess = d - (d[:, [k]] + d[[k], :])
            excess -= rtol * np.maximum(d, 1e-300)
            i, j = np.unravel_index(np.argmax(excess), excess.shape)
            if excess[i, j] > worst:
                worst, triple = float(excess[i, j]), (int(i), int(k), int(j))
        return worst <= 0.0, triple, worst
    rng = np.random.default_rng(seed)
    t = rng.integers(0, n, size=(max_triples, 3))
    ij = _pair_values(space, t[:, 0], t[:, 2])
    ik = _pair_values(space, t[:, 0], t[:, 1])
    kj = _pair_values(space, t[:, 1], t[:, 2])
    excess = ij - (ik + kj) - rtol * ij
    m = int(np.argmax(excess))
    return bool(excess[m] <= 0.0), tuple(int(v) for v in t[m]), float(max(excess[m], 0.0))


def _pair_values(space, a, b):
    if space.coords is not None:
        base = np.linalg.norm(space.coords[a] - space.coords[b], ord=_NORMS[space.metric], axis=1)
    else:
        base = space.matrix[a, b]
    return space._from_base(base)


def build_space(coords=None, *, matrix=None, edges=None, n=None, metric="euclidean", exponent=1.0,
                chart=None, weight2=None, h=None, ids=None, audit=True, seed=0, meta=None):
    """Validate inputs and return a :class:`FiniteMetricSpace`.

    Exactly one distance source is used: ``coords`` with ``metric`` in
    {euclidean, cityblock}, a full square ``matrix``, or a weighted ``edges``
    list ``[(i, j, w), ...]`` completed by shortest paths.  ``h`` defaults to
    three times the median nearest-neighbor spacing.
    """
    sources = sum(x is not None for x in (coords, matrix, edges))
    if sources != 1:
        raise PreconditionError("give exactly one of coords, matrix, edges")
    if exponent <= 0:
        raise MetricError("exponent must be positive")

    if edges is not None:
        matrix = _complete_edges(edges, n)
    if coords is not None:
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        if metric not in _NORMS:
            raise MetricError(f"unknown metric {metric!r}")
        if not np.all(np.isfinite(coords)):
            raise MetricError("non-finite coordinates")
        if len(coords) > 1 and np.min(cKDTree(coords).query(coords, k=2)[0][:, 1]) <= 0:
            raise MetricError("repeated point: distinct points must be at positive distance")
        metric = "euclidean" if _NORMS[metric] == 2 else "cityblock"
    else:
        matrix = _validate_matrix(matrix)
        metric = "precomputed"

    size = len(coords) if coords is not None else len(matrix)
    if chart is not None:
        chart = np.asarray(chart, dtype=float)
        if chart.shape != (size, 2):
            raise PreconditionError("chart must have shape (n, 2)")
        if len(np.unique(chart, axis=0)) != size:
            raise PreconditionError("chart is not injective")
    if weight2 is not None:
        weight2 = np.asarray(weight2, dtype=float)
        if weight2.shape != (size,) or np.any(weight2 < 0):
            raise PreconditionError("weight2 must be a nonnegative vector of length n")
    if ids is not None and len(ids) != size:
        raise PreconditionError("ids must have length n")

    space = FiniteMetricSpace(coords=coords, matrix=matrix, metric=metric, exponent=float(exponent),
                              chart=chart, weight2=weight2, ids=None if ids is None else tuple(ids),
                              meta=dict(meta or {}))
    if audit:
        ok, triple, excess = audit_triangle(space, seed=seed)
        if not ok:
            raise MetricError(f"triangle inequality fails on {triple} by {excess:.3g}")
    h = 3.0 * space.spacing if h is None else float(h)
    return replace(space, h=h)


def _validate_matrix(matrix):
    d = np.asarray(matrix, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise MetricError("distance matrix must be square")
    if not np.all(np.isfinite(d)):
        raise MetricError("distance matrix has non-finite entries")
    if np.any(d < 0):
        raise MetricError("negative distance")
    scale = max(float(np.abs(d).max()), 1e-300)
    if np.max(np.abs(d - d.T)) > 1e-12 * scale:
        raise MetricError("asymmetric distance matrix")
    if np.any(np.diag(d) != 0):
        raise MetricError("nonzero self-distance")
    off = d + np.eye(len(d))
    if np.any(off <= 0):
        raise MetricError("distinct points at zero distance")
    return 0.5 * (d + d.T)


def _complete_edges(edges, n):
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 2 or edges.shape[1] != 3:
        raise MetricError("edges must be rows (i, j, w)")
    i = edges[:, 0].astype(np.intp)
    j = edges[:, 1].astype(np.intp)
    w = edges[:, 2]
    if np.any(w <= 0):
        raise MetricError("edge lengths must be positive")
    n = int(max(i.max(), j.max()) + 1) if n is None else int(n)
    g = sparse.coo_matrix((w, (i, j)), shape=(n, n)).tocsr()
    full = csgraph.shortest_path(g, directed=False)
    if not np.all(np.isfinite(full)):
        raise DisconnectedError("edge list is disconnected; a full metric cannot be completed")
    return full


# ---------------------------------------------------------------------------
# nets and measure proxies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Net:
    """Maximal ``eps``-separated subset with a nearest-member assignment."""

    eps: float
    members: np.ndarray
    points: np.ndarray
    assignment: np.ndarray
    assignment_distance: np.ndarray

    def __len__(self):
        return len(self.members)


def maximal_net(space: FiniteMetricSpace, eps: float, subset=None, order=None, seed=None) -> Net:
    """Greedy maximal ``eps``-separated subset of ``subset`` (default: all points).

    Candidates are visited in ``order`` (default: increasing id, or a seeded
    shuffle when ``seed`` is given).  Members are pairwise ``>= eps`` apart and
    every point lies at distance ``< eps`` from some member.
    """
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    pts = np.arange(space.n) if subset is None else np.unique(np.asarray(subset, dtype=np.intp))
    if order is None:
        order = pts.copy()
        if seed is not None:
            np.random.default_rng(seed).shuffle(order)
    else:
        order = np.asarray(order, dtype=np.intp)
        order = order[np.isin(order, pts)]
    if pts.size == 0:
        empty = np.zeros(0, dtype=np.intp)
        return Net(eps, empty, empty, empty, np.zeros(0))

    in_subset = np.zeros(space.n, dtype=bool)
    in_subset[pts] = True
    covered = np.zeros(space.n, dtype=bool)
    members = []
    for c in order:
        if covered[c]:
            continue
        members.append(c)
        near = space.ball(c, eps, closed=False)
        covered[near[in_subset[near]]] = True
    members = np.asarray(members, dtype=np.intp)
    assign, adist = space.nearest(members, pts)
    return Net(float(eps), members, pts, assign, adist)


def covering_number(space, subset, eps, order=None) -> int:
    """Size of a greedy maximal ``eps``-net of ``subset``; covers it by open ``eps``-balls."""
    return len(maximal_net(space, eps, subset=subset, order=order).members)


def hausdorff_proxy(space: FiniteMetricSpace, q: int, subset, eps: float, order=None) -> float:
    """Sample proxy for the ``q``-dimensional Hausdorff measure of ``subset``.

    ``q = 1``: covering number at scale ``eps`` times ``eps``.
    ``q = 2``: sum of ``weight2`` when the space carries area weights,
    otherwise covering number times ``eps**2``.
    """
    subset = np.asarray(subset, dtype=np.intp)
    if subset.size == 0:
        return 0.0
    if q not in (1, 2):
        raise PreconditionError("q must be 1 or 2")
    if q == 2 and space.weight2 is not None:
        return float(space.weight2[subset].sum())
    if subset.size > 1:
        min_gap = _min_spacing(space, subset)
        if eps < min_gap * (1 - 1e-12):
            raise PreconditionError(f"eps={eps:.4g} is below the minimal spacing {min_gap:.4g} of the subset")
    count = covering_number(space, subset, eps, order=order)
    return float(count * eps ** q)


def _min_spacing(space, subset):
    if space.coords is not None:
        tree = cKDTree(space.coords[subset])
        base, _ = tree.query(space.coords[subset], k=2, p=_NORMS[space.metric])
        return float(space._from_base(base[:, 1]).min())
    d = space.pairwise(subset)
    np.fill_diagonal(d, np.inf)
    return float(d.min())


# ---------------------------------------------------------------------------
# path metric
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PathMetricSpace:
    """Shortest-path metric of the ``h``-neighborhood graph, edges weighted by ``d``."""

    base: FiniteMetricSpace
    h: float
    graph: sparse.csr_matrix

    @property
    def n(self):
        return self.base.n

    def distances_from(self, sources, limit=np.inf) -> np.ndarray:
        return csgraph.dijkstra(self.graph, directed=False, indices=sources, limit=limit)

    def dist(self, i, j) -> float:
        return float(self.distances_from(i)[j])

    def geodesic(self, i, j) -> list[int]:
        """Vertices of a shortest ``h``-graph path from ``i`` to ``j``."""
        return shortest_path(self.graph, i, j)

    @cached_property
    def matrix(self) -> np.ndarray:
        if self.n > 4000:
            raise PreconditionError("all-pairs path metric limited to 4000 points; query by source instead")
        return csgraph.dijkstra(self.graph, directed=False)

    def quasiconvexity_factor(self, sources=None, max_sources=200, seed=0):
        """Empirical ``L = max d'/d`` with its worst pair; infinite pairs are flagged.

        Returns ``(L_hat, (i, j), n_disconnected)``.
        """
        order = self.base.canonical_order
        if sources is None:
            if self.n <= max_sources:
                sources = order
            else:
                rng = np.random.default_rng(seed)
                sources = order[np.sort(rng.choice(self.n, size=max_sources, replace=False))]
        sources = np.asarray(sources, dtype=np.intp)
        dp = self.distances_from(sources)
        d = self.base.cross(sources)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(d > 0, dp / d, 1.0)
        finite = np.isfinite(ratio)
        n_bad = int((~finite).sum())
        ratio = np.where(finite, ratio, -np.inf)
        a, b = np.unravel_index(np.argmax(ratio), ratio.shape)
        return max(1.0, float(ratio[a, b])), (int(sources[a]), int(b)), n_bad


def path_metric(space: FiniteMetricSpace, h=None) -> PathMetricSpace:
    """Path metric ``d'`` of the neighborhood graph at scale ``h`` (default ``space.h``)."""
    h = space.h if h is None else float(h)
    g = space.graph if h == space.h else space.radius_graph(h)
    return PathMetricSpace(space, h, g)


def shortest_path(graph, i, j, mask=None) -> list[int]:
    """Vertex list of a shortest path in ``graph`` (optionally restricted to ``mask``)."""
    if i == j:
        return [int(i)]
    g = graph
    if mask is not None:
        keep = np.asarray(mask, dtype=bool)
        g = _restrict(graph, keep)
    dist, pred = csgraph.dijkstra(g, directed=False, indices=i, return_predecessors=True)
    if not np.isfinite(dist[j]):
        raise DisconnectedError(f"no path from {i} to {j}", pair=(int(i), int(j)))
    path = [int(j)]
    while path[-1] != i:
        path.append(int(pred[path[-1]]))
    return path[::-1]


def _restrict(graph, keep):
    """Copy of ``graph`` keeping only edges between vertices flagged in ``keep``."""
    coo = graph.tocoo()
    ok = keep[coo.row] & keep[coo.col]
    return sparse.csr_matrix((coo.data[ok], (coo.row[ok], coo.col[ok])), shape=graph.shape)


def component_labels(graph, keep=None):
    """Connected-component labels of ``graph`` restricted to ``keep`` (-1 outside)."""
    g = graph if keep is None else _restrict(graph, keep)
    _, labels = csgraph.connected_components(g, directed=False)
    if keep is not None:
        labels = np.where(keep, labels, -1)
    return labels
