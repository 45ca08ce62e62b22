"""Deterministic sample spaces with known geometry, plus a manifest of expected constants.

Each generator returns a :class:`FiniteMetricSpace` whose ``meta`` records the
fixture spec and the expected constants with their provenance tag
(``trivial`` for facts of the construction, ``derived`` for values computed
from the continuum geometry).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import PreconditionError
from .space import FiniteMetricSpace, build_space

KINDS = ("flat-disk", "grid", "sphere", "cone", "dumbbell", "snowflake", "circle-loop", "strip", "annulus")

# expected constants per fixture kind: name -> (value or [lo, hi], provenance, note)
MANIFEST = {
    "flat-disk": {
        "assouad_Q": ([1.8, 2.2], "derived", "planar covering counts scale like (r/eps)^2"),
        "ahlfors_C": ([1.0, 4.0], "derived", "cell areas sum to pi r^2 away from the rim"),
        "llc": ([1.0, 1.5], "derived", "convex planar domain"),
        "quasiconvexity": ([1.0, 1.5], "derived", "graph paths on a dense planar sample"),
        "chord_arc": ([1.0, 2.0], "derived", "sigma minimizer is the circle, lambda = pi/2"),
    },
    "grid": {
        "assouad_Q": ([1.8, 2.2], "derived", "planar covering counts"),
        "ahlfors_C": ([1.0, 4.0], "derived", "weights h^2 sum to ball areas"),
        "weight2": ("h^2", "trivial", "construction"),
    },
    "sphere": {
        "quasiconvexity": ([1.0, math.pi / 2 + 0.2], "derived", "great-circle arc over chord is at most pi/2"),
        "assouad_Q": ([1.8, 2.2], "derived", "smooth surface"),
    },
    "cone": {
        "chord_arc": ([1.0, 3.0], "derived", "cone unrolls to a wedge; optimal loops stay round up to the cone factor"),
    },
    "dumbbell": {
        "llc": ([1.0, math.inf], "derived", "the corridor forces large LLC2 at the neck scale"),
    },
    "snowflake": {
        "assouad_Q": ("1/alpha", "derived", "covering numbers of a snowflaked segment"),
    },
    "circle-loop": {
        "three_point": (1.0, "derived", "shorter arc diameter equals the chord at antipodes"),
        "chord_arc": (math.pi / 2, "derived", "half circumference over diameter"),
    },
    "strip": {
        "ahlfors_flag": (True, "derived", "ball measure over r^2 collapses once r exceeds the width"),
    },
    "annulus": {
        "optimal_radius": ("clamp(R, r_in, r_out)", "derived", "1-D minimization of R^2/r + r over the band"),
    },
}


@dataclass(frozen=True)
class FixtureSpec:
    """Fixture kind, resolution, geometric parameters and seed."""

    kind: str
    n: int = 2000
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown fixture kind {self.kind!r}; choose from {KINDS}")
        if self.n < 2:
            raise PreconditionError("resolution must be at least 2")

    def to_dict(self):
        return asdict(self)


def _hex_lattice(a: float, extent: float) -> np.ndarray:
    m = int(math.ceil(extent / a)) + 2
    i, j = np.meshgrid(np.arange(-2 * m, 2 * m + 1), np.arange(-m - 1, m + 2), indexing="ij")
    p = np.c_[a * (i + 0.5 * j).ravel(), a * (math.sqrt(3) / 2) * j.ravel()]
    return p[np.max(np.abs(p), axis=1) <= extent]


def _jitter(p: np.ndarray, a: float, rng, amount=0.1) -> np.ndarray:
    return p + rng.uniform(-amount, amount, p.shape) * a


def hex_spacing_for(n: int, area: float) -> float:
    """Hexagonal lattice spacing giving about ``n`` points over ``area``."""
    return math.sqrt(2.0 * area / (math.sqrt(3) * n))


def flat_disk(n=2000, radius=1.0, seed=0, jitter=0.1) -> FiniteMetricSpace:
    """Jittered hexagonal sample of a Euclidean disk; ``weight2`` is the hexagonal cell area."""
    a = hex_spacing_for(n, math.pi * radius ** 2)
    rng = np.random.default_rng(seed)
    p = _hex_lattice(a, radius)
    p = _jitter(p[np.hypot(*p.T) < radius - 0.1 * a], a, rng, jitter)
    w = np.full(len(p), a * a * math.sqrt(3) / 2)
    return build_space(p, chart=p, weight2=w, audit=False,
                       meta={"lattice_spacing": a, "radius": radius})


def grid(n=10_000, side=1.0, seed=0) -> FiniteMetricSpace:
    """``m x m`` square grid on ``[0, side]^2`` with ``m = round(sqrt(n))`` and ``weight2 = h^2``."""
    m = max(2, int(round(math.sqrt(n))))
    h = side / m
    x = (np.arange(m) + 0.5) * h
    p = np.stack(np.meshgrid(x, x, indexing="ij"), -1).reshape(-1, 2)
    return build_space(p, chart=p, weight2=np.full(len(p), h * h), audit=False, meta={"grid_spacing": h})


def strip(n=4000, length=20.0, width=0.5, seed=0) -> FiniteMetricSpace:
    """Long thin grid ``[0, length] x [0, width]``; not Ahlfors regular across scales."""
    h = math.sqrt(length * width / n)
    nx, ny = max(2, int(round(length / h))), max(2, int(round(width / h)))
    x = (np.arange(nx) + 0.5) * length / nx
    y = (np.arange(ny) + 0.5) * width / ny
    p = np.stack(np.meshgrid(x, y, indexing="ij"), -1).reshape(-1, 2)
    w = np.full(len(p), (length / nx) * (width / ny))
    return build_space(p, chart=p, weight2=w, audit=False, meta={"length": length, "width": width})


def annulus(n=4000, r_in=0.3, r_out=1.0, seed=0, jitter=0.1) -> FiniteMetricSpace:
    """Jittered hexagonal sample of ``r_in < |p| < r_out``; the last point is the (isolated) center.

    The center is appended so that loops can be asked to wind around it; it
    is far from every other sample, so the neighborhood graph excludes it.
    """
    a = hex_spacing_for(n, math.pi * (r_out ** 2 - r_in ** 2))
    rng = np.random.default_rng(seed)
    p = _hex_lattice(a, r_out)
    r = np.hypot(*p.T)
    p = _jitter(p[(r > r_in + 0.1 * a) & (r < r_out - 0.1 * a)], a, rng, jitter)
    p = np.vstack([p, [0.0, 0.0]])
    w = np.r_[np.full(len(p) - 1, a * a * math.sqrt(3) / 2), 0.0]
    return build_space(p, chart=p, weight2=w, audit=False,
                       meta={"lattice_spacing": a, "r_in": r_in, "r_out": r_out, "center": len(p) - 1})


def dumbbell(n=3000, radius=0.5, gap=0.6, neck=0.08, seed=0, jitter=0.1) -> FiniteMetricSpace:
    """Two disks joined by a thin corridor along the x-axis."""
    cx = radius + gap / 2
    area = 2 * math.pi * radius ** 2 + gap * neck
    a = hex_spacing_for(n, area)
    rng = np.random.default_rng(seed)
    p = _hex_lattice(a, cx + radius)
    left = np.hypot(p[:, 0] + cx, p[:, 1]) < radius
    right = np.hypot(p[:, 0] - cx, p[:, 1]) < radius
    bar = (np.abs(p[:, 0]) <= cx) & (np.abs(p[:, 1]) <= neck / 2)
    p = _jitter(p[left | right | bar], a, rng, jitter)
    w = np.full(len(p), a * a * math.sqrt(3) / 2)
    return build_space(p, chart=p, weight2=w, audit=False, meta={"lattice_spacing": a, "neck": neck})


def sphere(n=2000, seed=0) -> FiniteMetricSpace:
    """Fibonacci sample of the unit sphere with the chordal metric.

    The chart is stereographic projection from the north pole (no sample
    sits at the pole), and ``weight2 = 4 pi / n``.
    """
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    phi = k * math.pi * (3.0 - math.sqrt(5.0))
    r = np.sqrt(1.0 - z * z)
    p = np.c_[r * np.cos(phi), r * np.sin(phi), z]
    chart = p[:, :2] / (1.0 - z)[:, None]
    return build_space(p, chart=chart, weight2=np.full(n, 4 * math.pi / n), audit=False, meta={"radius": 1.0})


def cone(n=3000, angle=1.5 * math.pi, radius=1.0, seed=0, jitter=0.1) -> FiniteMetricSpace:
    """Flat cone of total angle ``angle`` with apex at id 0, as an exact distance matrix.

    Points ``(r, phi)`` with ``phi`` in ``[0, angle)`` have intrinsic distance
    ``sqrt(r1^2 + r2^2 - 2 r1 r2 cos(delta))`` with ``delta`` the cyclic angle
    difference, capped at ``r1 + r2`` when ``delta >= pi``.  The chart stretches
    angles by ``2 pi / angle``.
    """
    if not 0 < angle <= 2 * math.pi:
        raise PreconditionError("cone angle must lie in (0, 2 pi]")
    a = hex_spacing_for(n, 0.5 * angle * radius ** 2)
    rng = np.random.default_rng(seed)
    p = _jitter(_hex_lattice(a, radius), a, rng, jitter)
    r = np.hypot(*p.T)
    phi = np.mod(np.arctan2(p[:, 1], p[:, 0]), 2 * math.pi)
    keep = (r < radius) & (phi < angle) & (r > 0.5 * a)
    r, phi = np.r_[0.0, r[keep]], np.r_[0.0, phi[keep]]
    delta = np.abs(phi[:, None] - phi[None, :])
    delta = np.minimum(delta, angle - delta)
    d2 = r[:, None] ** 2 + r[None, :] ** 2 - 2 * np.outer(r, r) * np.cos(delta)
    d = np.where(delta >= math.pi, r[:, None] + r[None, :], np.sqrt(np.maximum(d2, 0.0)))
    np.fill_diagonal(d, 0.0)
    psi = phi * (2 * math.pi / angle)
    chart = np.c_[r * np.cos(psi), r * np.sin(psi)]
    w = np.r_[0.0, np.full(len(r) - 1, a * a * math.sqrt(3) / 2)]
    return build_space(matrix=d, chart=chart, weight2=w, audit=False,
                       meta={"lattice_spacing": a, "angle": angle, "apex": 0, "polar": np.c_[r, phi]})


def snowflake(n=1000, alpha=0.5, seed=0) -> FiniteMetricSpace:
    """Uniform sample of ``[0, 1]`` under ``|x - y| ** alpha``."""
    if not 0 < alpha <= 1:
        raise PreconditionError("snowflake exponent must lie in (0, 1]")
    x = (np.arange(n) + 0.5) / n
    return build_space(x[:, None], exponent=alpha, audit=False, meta={"alpha": alpha})


def circle_loop(n=256, radius=1.0, seed=0) -> FiniteMetricSpace:
    """``n`` equally spaced points on a Euclidean circle (chart = the points)."""
    t = 2 * math.pi * np.arange(n) / n
    p = radius * np.c_[np.cos(t), np.sin(t)]
    return build_space(p, chart=p, audit=False, meta={"radius": radius})


_GENERATORS = {
    "flat-disk": flat_disk, "grid": grid, "sphere": sphere, "cone": cone, "dumbbell": dumbbell,
    "snowflake": snowflake, "circle-loop": circle_loop, "strip": strip, "annulus": annulus,
}


def generate(spec: FixtureSpec) -> FiniteMetricSpace:
    """Build the fixture described by ``spec`` and attach the expected-constants manifest."""
    fn = _GENERATORS[spec.kind]
    try:
        space = fn(n=spec.n, seed=spec.seed, **spec.params)
    except TypeError as exc:
        raise PreconditionError(f"invalid parameters for {spec.kind}: {exc}") from exc
    meta = dict(space.meta)
    meta.update(fixture=spec.to_dict(), expected={k: {"value": v[0], "provenance": v[1], "note": v[2]}
                                                 for k, v in MANIFEST[spec.kind].items()})
    object.__setattr__(space, "meta", meta)
    return space


def center_index(space: FiniteMetricSpace, point=(0.0, 0.0)) -> int:
    """Id of the sample whose chart position is nearest ``point``."""
    if space.chart is None:
        raise PreconditionError("center lookup needs a chart")
    return int(np.argmin(np.hypot(*(space.chart - np.asarray(point)).T)))
