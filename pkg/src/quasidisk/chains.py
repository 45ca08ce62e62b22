"""Epsilon-chains, minimal chains and the deviation score used to build quasiarcs."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csgraph

from .errors import DisconnectedError, PreconditionError
from .space import FiniteMetricSpace


@dataclass(frozen=True)
class DiscreteChain:
    """Ordered point ids whose consecutive gaps are at most ``eps``."""

    eps: float
    points: np.ndarray

    @property
    def n(self) -> int:
        """Number of steps (cardinality minus one)."""
        return len(self.points) - 1

    def __len__(self):
        return len(self.points)

    def gaps(self, space: FiniteMetricSpace) -> np.ndarray:
        p = self.points
        if len(p) < 2:
            return np.zeros(0)
        return np.array([space.dist(a, b) for a, b in zip(p[:-1], p[1:])])

    def to_dict(self):
        return {"eps": self.eps, "points": [int(v) for v in self.points]}


@dataclass(frozen=True)
class ScoredChain:
    """A chain together with the reference arc and exponent used to score it."""

    chain: DiscreteChain
    reference: np.ndarray
    score: float
    exponent: float
    deviation: float
    h_bound: float | None = None
    diagnostics: list = field(default_factory=list)
    window: tuple | None = None

    def to_dict(self):
        out = self.chain.to_dict()
        out.update(score=self.score, exponent=self.exponent, deviation=self.deviation,
                   h_bound=self.h_bound, diagnostics=list(self.diagnostics),
                   window=None if self.window is None else list(self.window))
        return out


def _check_chain(space, chain, x, y, eps):
    p = chain.points
    assert p[0] == x and p[-1] == y, "chain endpoints"
    if len(p) > 1:
        gaps = chain.gaps(space)
        assert np.all(gaps <= eps * (1 + 1e-12)), "chain gap exceeds eps"


def eps_graph(space: FiniteMetricSpace, eps: float):
    return space.radius_graph(eps)


def minimal_chain(space: FiniteMetricSpace, x: int, y: int, eps: float, graph=None) -> DiscreteChain:
    """Fewest-point ``eps``-chain from ``x`` to ``y`` (breadth-first search).

    Points two or more steps apart along the output are more than ``eps``
    apart, otherwise a shorter chain would exist; this is asserted.
    """
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    if x == y:
        return DiscreteChain(float(eps), np.array([x], dtype=np.intp))
    g = eps_graph(space, eps) if graph is None else graph
    hops, pred = csgraph.shortest_path(g, directed=False, unweighted=True, indices=x, return_predecessors=True)
    if not np.isfinite(hops[y]):
        raise DisconnectedError(f"{x} and {y} are disconnected at scale eps={eps:.4g}", pair=(x, y), scale=eps)
    path = [y]
    while path[-1] != x:
        path.append(int(pred[path[-1]]))
    chain = DiscreteChain(float(eps), np.asarray(path[::-1], dtype=np.intp))
    _check_chain(space, chain, x, y, eps)
    if len(chain) > 2:
        d = space.pairwise(chain.points)
        far = np.triu(np.ones_like(d, dtype=bool), k=2)
        assert np.all(d[far] > eps), "minimal chain lost its separation property"
    return chain


def node_costs(deviation: np.ndarray, eps: float, Q: float) -> np.ndarray:
    """Per-point score contribution ``1 + (deviation / eps) ** (2Q)`` (with ``0**0 = 1``)."""
    return 1.0 + np.power(np.asarray(deviation, dtype=float) / eps, 2.0 * Q)


def score(space: FiniteMetricSpace, chain, reference, eps: float, Q: float) -> float:
    """Deviation score of ``chain`` relative to the point set ``reference``."""
    if eps <= 0 or Q < 0:
        raise PreconditionError("need eps > 0 and Q >= 0")
    pts = chain.points if isinstance(chain, DiscreteChain) else np.asarray(chain, dtype=np.intp)
    if len(pts) == 0:
        return 0.0
    dev = space.dist_to_set(reference, pts)
    return float(node_costs(dev, eps, Q).sum())


def h_bound(D: float, lam: float, r: float, eps: float, Q: float) -> float:
    """A-priori bound on the deviation of a score minimizer from its reference."""
    return (4.0 * D) ** (1.0 / (2.0 * Q)) * (4.0 * lam * r * eps) ** 0.5


def score_minimizing_chain(space: FiniteMetricSpace, x: int, y: int, reference, eps: float, Q: float,
                           D: float | None = None, lam: float | None = None, graph=None,
                           window=None) -> ScoredChain:
    """Exact minimizer of the deviation score over all ``eps``-chains from ``x`` to ``y``.

    Runs Dijkstra on the ``eps``-graph with node costs; ties go to fewer hops,
    then to shorter geometric length, then to smaller predecessor id.  When
    ``D`` and ``lam`` are given the deviation bound is checked and a violation
    is recorded as a diagnostic.
    """
    if eps <= 0 or Q < 0:
        raise PreconditionError("need eps > 0 and Q >= 0")
    reference = np.asarray(reference, dtype=np.intp)
    dev = space.dist_to_set(reference)
    cost = node_costs(dev, eps, Q)
    g = eps_graph(space, eps) if graph is None else graph
    indptr, indices, weights = g.indptr, g.indices, g.data

    inf = (np.inf, 0, 0.0)
    best = {x: (float(cost[x]), 0, 0.0)}
    pred = {x: -1}
    heap = [(float(cost[x]), 0, 0.0, x)]
    done = set()
    while heap:
        s, hops, length, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == y:
            break
        for k in range(indptr[u], indptr[u + 1]):
            v = int(indices[k])
            if v in done:
                continue
            key = (s + cost[v], hops + 1, length + weights[k])
            old = best.get(v, inf)
            if key < old or (key == old and u < pred[v]):
                best[v] = key
                pred[v] = u
                heapq.heappush(heap, (key[0], key[1], key[2], v))
    if y not in done:
        raise DisconnectedError(f"{x} and {y} are disconnected at scale eps={eps:.4g}", pair=(x, y), scale=eps)

    path = [y]
    while path[-1] != x:
        path.append(pred[path[-1]])
    chain = DiscreteChain(float(eps), np.asarray(path[::-1], dtype=np.intp))
    _check_chain(space, chain, x, y, eps)
    total = float(cost[chain.points].sum())
    deviation = float(dev[chain.points].max())

    bound, diagnostics = None, []
    if D is not None and lam is not None and Q > 0:
        bound = h_bound(D, lam, space.dist(x, y), eps, Q)
        if deviation > bound * (1 + 1e-9):
            diagnostics.append(f"deviation {deviation:.4g} exceeds bound {bound:.4g}: "
                               "the supplied (D, lambda) do not hold for this space")
    return ScoredChain(chain, reference, total, 2.0 * Q, deviation, bound, diagnostics,
                       None if window is None else tuple(window))
