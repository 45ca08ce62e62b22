"""Arcs: extraction from concatenated paths, quasiarc construction and certification,
and bounded-turning estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .chains import ScoredChain, score_minimizing_chain
from .errors import DisconnectedError, PreconditionError
from .space import FiniteMetricSpace, path_metric, shortest_path

_MAX_CERTIFY = 6000


@dataclass(frozen=True)
class DiscreteArc:
    """Injective ordered sequence of point ids."""

    points: np.ndarray
    segment: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.intp)
        object.__setattr__(self, "points", pts)
        if len(np.unique(pts)) != len(pts):
            raise PreconditionError("arc points must be distinct")

    def __len__(self):
        return len(self.points)

    @property
    def start(self):
        return int(self.points[0])

    @property
    def end(self):
        return int(self.points[-1])

    def length(self, space: FiniteMetricSpace) -> float:
        p = self.points
        if len(p) < 2:
            return 0.0
        return float(sum(space.dist(a, b) for a, b in zip(p[:-1], p[1:])))

    def position(self, u) -> int:
        hit = np.flatnonzero(self.points == u)
        if hit.size == 0:
            raise PreconditionError(f"point {u} is not on the arc")
        return int(hit[0])

    def sub(self, u, v) -> "DiscreteArc":
        """The subarc between members ``u`` and ``v`` (in arc order)."""
        a, b = sorted((self.position(u), self.position(v)))
        return DiscreteArc(self.points[a:b + 1])

    def to_dict(self):
        return {"points": [int(v) for v in self.points]}


@dataclass(frozen=True)
class QuasiarcCertificate:
    """Measured ``M`` such that close pairs on the arc span subarcs of diameter ``<= M * eps``."""

    eps: float
    M: float
    worst_pair: tuple | None
    worst_ratio: float
    diagnostics: list = field(default_factory=list)

    def to_dict(self):
        return {"eps": self.eps, "M": self.M, "worst_pair": self.worst_pair,
                "worst_ratio": self.worst_ratio, "diagnostics": list(self.diagnostics)}


@dataclass(frozen=True)
class TurningEstimate:
    """Bounded-turning estimate over sampled pairs.

    ``lam`` is the lower estimate (minimax radius over ``d``), which never
    exceeds the graph-optimal value; ``lam_witness`` is the diameter ratio of
    an explicit connecting path for the worst pair.
    """

    lam: float
    worst_pair: tuple | None
    lam_witness: float
    witness_path: np.ndarray | None
    n_pairs: int
    n_disconnected: int
    window: tuple

    def to_dict(self):
        return {"lambda": self.lam, "worst_pair": self.worst_pair, "lambda_witness": self.lam_witness,
                "n_pairs": self.n_pairs, "n_disconnected": self.n_disconnected,
                "window": list(self.window), "lower_bound": True}


# ---------------------------------------------------------------------------
# extraction
# ---------------------------------------------------------------------------

def extract_arc(segments) -> DiscreteArc:
    """Injective arc through the union of end-to-start matched segments.

    Starting in segment 0, repeatedly jump to the highest-index segment that
    meets the unused remainder of the current segment, cutting at the first
    such meeting point.  Segment indices increase strictly along the output,
    so every subarc lies in the segments whose indices lie between those of
    its endpoints.
    """
    segs = [np.asarray(s, dtype=np.intp) for s in segments]
    if not segs or any(len(s) == 0 for s in segs):
        raise PreconditionError("segments must be nonempty")
    for a, b in zip(segs[:-1], segs[1:]):
        if a[-1] != b[0]:
            raise PreconditionError(f"mismatched endpoints {a[-1]} -> {b[0]}")
    segs = [_loop_erase(s) for s in segs]

    # for each point: the segments containing it and its position in each
    where: dict[int, dict[int, int]] = {}
    for k, s in enumerate(segs):
        for pos, v in enumerate(s):
            where.setdefault(int(v), {})[k] = pos

    out, seg_of = [], []
    k, start = 0, 0
    last = len(segs) - 1
    while True:
        rest = segs[k][start:]
        if k == last:
            out.extend(rest)
            seg_of.extend([k] * len(rest))
            break
        target = max(max(where[int(v)]) for v in rest)
        cut = None
        # first point of the remainder lying on the chosen segment
        for pos, v in enumerate(rest):
            if target in where[int(v)]:
                cut = pos
                break
        out.extend(rest[:cut])
        seg_of.extend([k] * cut)
        start = where[int(rest[cut])][target]
        k = target

    arc = DiscreteArc(np.asarray(out, dtype=np.intp), np.asarray(seg_of, dtype=np.intp))
    assert arc.start == segs[0][0] and arc.end == segs[-1][-1]
    assert np.all(np.diff(arc.segment) >= 0), "locality: segment indices must not decrease"
    return arc


def _loop_erase(seg):
    """Remove loops from a single segment so it is injective."""
    out, seen = [], {}
    for v in seg:
        v = int(v)
        if v in seen:
            del out[seen[v] + 1:]
            seen = {p: i for i, p in enumerate(out)}
        else:
            seen[v] = len(out)
            out.append(v)
    return np.asarray(out, dtype=np.intp)


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------

def subarc_diameters(d: np.ndarray) -> np.ndarray:
    """``diam(points i..j)`` for all ``i <= j`` given the arc's distance matrix."""
    m = len(d)
    upper = np.triu(d)
    # col[i, j] = max_{i <= a <= j} d[a, j]
    col = np.maximum.accumulate(upper[::-1], axis=0)[::-1]
    col = np.triu(col)
    return np.maximum.accumulate(col, axis=1) * np.triu(np.ones((m, m), dtype=bool))


def certify_quasiarc(space: FiniteMetricSpace, arc, eps: float) -> QuasiarcCertificate:
    """Measured quasiarc constant of ``arc`` at scale ``eps`` with the worst pair."""
    pts = arc.points if isinstance(arc, DiscreteArc) else np.asarray(arc, dtype=np.intp)
    if len(pts) == 0:
        raise PreconditionError("empty arc")
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    if len(pts) > _MAX_CERTIFY:
        raise PreconditionError(f"arc has {len(pts)} points; certification is limited to {_MAX_CERTIFY}")
    d = space.pairwise(pts)
    diam = subarc_diameters(d)
    close = np.triu(d <= eps, k=1)
    if not close.any():
        return QuasiarcCertificate(float(eps), 1.0, None, 0.0)
    ratio = np.where(close, diam / eps, -np.inf)
    i, j = np.unravel_index(np.argmax(ratio), ratio.shape)
    worst = float(ratio[i, j])
    return QuasiarcCertificate(float(eps), max(1.0, worst), (int(pts[i]), int(pts[j])), worst)


def containment_factor(lam: float, D: float, Q: float) -> float:
    """Radius factor ``N`` with the constructed arc inside ``B(x, N d(x, y))``."""
    return 2.0 * lam + (4.0 * D) ** (1.0 / (2.0 * Q)) * (4.0 * lam) ** 0.5


@dataclass(frozen=True)
class QuasiarcBuild:
    arc: DiscreteArc
    certificate: QuasiarcCertificate
    scored: ScoredChain | None
    N: float | None
    radius_ratio: float
    diagnostics: list = field(default_factory=list)

    def to_dict(self):
        return {"arc": self.arc.to_dict(), "certificate": self.certificate.to_dict(),
                "chain": None if self.scored is None else self.scored.to_dict(),
                "N": self.N, "radius_ratio": self.radius_ratio, "diagnostics": list(self.diagnostics)}


def build_quasiarc(space: FiniteMetricSpace, x: int, y: int, eps: float, Q: float | None = None,
                   lam: float | None = None, D: float | None = None, pm=None) -> QuasiarcBuild:
    """Construct and certify a quasiarc from ``x`` to ``y`` at scale ``eps``.

    The reference path is a graph geodesic; the score-minimizing chain around
    it is bridged by graph geodesics and the union reduced to an arc.  ``Q``
    defaults to the estimated Assouad dimension rounded up.  When ``lam`` and
    ``D`` are known, containment in ``B(x, N d(x, y))`` is checked and a
    violation is recorded as a diagnostic.
    """
    r = space.dist(x, y)
    if x == y:
        raise PreconditionError("endpoints must differ")
    if eps >= r:
        raise PreconditionError(f"eps={eps:.4g} must be below d(x, y)={r:.4g}")
    pm = path_metric(space) if pm is None else pm
    if r <= pm.h:
        arc = DiscreteArc(np.array([x, y], dtype=np.intp), np.zeros(2, dtype=np.intp))
        return QuasiarcBuild(arc, certify_quasiarc(space, arc, eps), None, None, 1.0)

    if Q is None:
        from .invariants import assouad_dimension
        Q = float(math.ceil(assouad_dimension(space).Q - 1e-9))
        Q = max(Q, 1.0)
    reference = pm.geodesic(x, y)
    scored = score_minimizing_chain(space, x, y, reference, eps, Q, D=D, lam=lam)
    chain = scored.chain.points
    segments = []
    for a, b in zip(chain[:-1], chain[1:]):
        segments.append(pm.geodesic(int(a), int(b)))
    arc = extract_arc(segments)
    cert = certify_quasiarc(space, arc, eps)

    diagnostics = list(scored.diagnostics)
    radius_ratio = float(space.cross([x], arc.points).max() / r)
    N = None
    if lam is not None and D is not None:
        N = containment_factor(lam, D, Q)
        if radius_ratio > N * (1 + 1e-9):
            diagnostics.append(f"arc leaves B(x, N d(x,y)): ratio {radius_ratio:.4g} > N={N:.4g}")
    return QuasiarcBuild(arc, cert, scored, N, radius_ratio, diagnostics)


# ---------------------------------------------------------------------------
# bounded turning
# ---------------------------------------------------------------------------

def minimax_radius(space: FiniteMetricSpace, x: int, graph=None, mask=None) -> np.ndarray:
    """For every vertex y the least ``t`` such that ``x`` and ``y`` connect inside ``B(x, t)``.

    Equivalent to binary search over ``t`` with connectivity tests on the
    graph truncated to the ball, computed exactly for all ``y`` at once from a
    minimum spanning tree with edge weights ``max(d(x, u), d(x, v))``.
    """
    g = space.graph if graph is None else graph
    r = space.distances_from(x)
    coo = sparse.triu(g, k=1).tocoo()
    if mask is not None:
        ok = mask[coo.row] & mask[coo.col]
        coo = sparse.coo_matrix((coo.data[ok], (coo.row[ok], coo.col[ok])), shape=g.shape)
    # +tiny keeps zero-radius edges at x from being dropped as structural zeros
    w = np.maximum(r[coo.row], r[coo.col]) + 1e-300
    mst = csgraph.minimum_spanning_tree(sparse.coo_matrix((w, (coo.row, coo.col)), shape=g.shape))
    order, pred = csgraph.breadth_first_order(mst, x, directed=False, return_predecessors=True)
    out = np.full(space.n, np.inf)
    out[x] = 0.0
    for v in order[1:]:
        out[v] = max(out[pred[v]], r[v])
    return out


def bounded_turning_constant(space: FiniteMetricSpace, subset=None, window=None, max_sources=40,
                             max_pairs=100_000, seed=0, graph=None) -> TurningEstimate:
    """Largest sampled ratio ``(least radius of a connecting path) / d(x, y)``.

    Pairs come from ``subset`` (default: all points) with ``d(x, y)`` inside
    ``window``; sources are drawn in the geometry-derived canonical order so
    the result does not depend on point labels.
    """
    g = space.graph if graph is None else graph
    pts = np.arange(space.n) if subset is None else np.unique(np.asarray(subset, dtype=np.intp))
    if window is None:
        window = (2.0 * space.spacing, space.diam / 4.0)
    lo, hi = window
    order = space.canonical_order
    order = order[np.isin(order, pts)]
    rng = np.random.default_rng(seed)
    if len(order) > max_sources:
        sources = order[np.sort(rng.choice(len(order), size=max_sources, replace=False))]
    else:
        sources = order
    per_source = max(1, max_pairs // max(1, len(sources)))

    best, worst_pair, n_pairs, n_bad, bad_pair = 1.0, None, 0, 0, None
    for x in sources:
        d = space.cross([x], pts)[0]
        cand = pts[(d >= lo) & (d <= hi)]
        if cand.size == 0:
            continue
        if cand.size > per_source:
            cand = cand[np.sort(rng.choice(cand.size, size=per_source, replace=False))]
        t = minimax_radius(space, int(x), g)[cand]
        n_pairs += cand.size
        bad = ~np.isfinite(t)
        if bad.any():
            n_bad += int(bad.sum())
            bad_pair = bad_pair or (int(x), int(cand[np.argmax(bad)]))
            continue
        ratio = t / d[np.searchsorted(pts, cand)]
        k = int(np.argmax(ratio))
        if worst_pair is None or ratio[k] > best:
            best = max(best, float(ratio[k]))
            worst_pair = (int(x), int(cand[k]))
    if n_bad:
        return TurningEstimate(math.inf, bad_pair, math.inf, None, n_pairs, n_bad, (float(lo), float(hi)))
    lam = best

    witness, lam_w = None, float("nan")
    if worst_pair is not None:
        x, y = worst_pair
        t = minimax_radius(space, x, g)[y]
        inside = space.distances_from(x) <= t * (1 + 1e-12)
        try:
            witness = np.asarray(shortest_path(g, x, y, mask=inside), dtype=np.intp)
            lam_w = max(1.0, float(space.pairwise(witness).max() / space.dist(x, y)))
        except DisconnectedError:
            witness = None
    return TurningEstimate(float(lam), worst_pair, lam_w, witness, n_pairs, n_bad, (float(lo), float(hi)))


# ---------------------------------------------------------------------------
# loops
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteLoop:
    """Cyclic injective point list; edge ``i`` joins ``points[i]`` to ``points[i + 1 mod n]``."""

    points: np.ndarray
    edge_lengths: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.intp)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "edge_lengths", np.asarray(self.edge_lengths, dtype=float))
        if len(np.unique(pts)) != len(pts):
            raise PreconditionError("loop points must be distinct")
        if len(self.edge_lengths) != len(pts):
            raise PreconditionError("one edge length per vertex required")

    @classmethod
    def from_points(cls, space: FiniteMetricSpace, points) -> "DiscreteLoop":
        pts = np.asarray(points, dtype=np.intp)
        nxt = np.roll(pts, -1)
        lengths = np.array([space.dist(a, b) for a, b in zip(pts, nxt)]) if len(pts) > 1 else np.zeros(len(pts))
        return cls(pts, lengths)

    def __len__(self):
        return len(self.points)

    @property
    def length(self) -> float:
        return float(self.edge_lengths.sum())

    @property
    def theta(self) -> np.ndarray:
        """Cyclic parameters in ``[0, 2 pi)`` proportional to arclength."""
        cum = np.r_[0.0, np.cumsum(self.edge_lengths)[:-1]]
        return 2 * np.pi * cum / max(self.length, 1e-300)

    def reversed(self) -> "DiscreteLoop":
        pts = self.points[::-1]
        # edge i of the reversed loop joins pts[i] to pts[i+1], the old edge n-2-i
        return DiscreteLoop(pts, np.roll(self.edge_lengths[::-1], -1))

    def to_dict(self):
        return {"points": [int(v) for v in self.points], "length": self.length}
