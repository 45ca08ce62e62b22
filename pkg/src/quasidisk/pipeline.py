"""End-to-end runs: hypothesis constants, quasiconvexity spot checks, chord-arc loop, domain checks."""

from __future__ import annotations

import dataclasses
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .coarea import Constants, quasiconvex_path
from .errors import PreconditionError, QuasidiskError
from .invariants import Budgets, ahlfors_regularity, assouad_dimension, llc_constants
from .io import SCHEMA
from .quasicircle import HypothesisConstants, chord_arc_pipeline, extract_domain, verify_domain
from .space import FiniteMetricSpace, path_metric


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs of a pipeline run; every report embeds them."""

    seed: int = 0
    guard: bool = True
    b0_radius: float | None = None
    R0: float | None = None
    ball_divisor: float = 16.0
    window: tuple | None = None
    quasiconvex_pairs: int = 6
    max_centers: int = 32
    radii_per_octave: int = 4
    verify: bool = True

    @property
    def budget(self) -> Budgets:
        return Budgets(max_centers=self.max_centers, radii_per_octave=self.radii_per_octave, seed=self.seed)

    @classmethod
    def from_mapping(cls, data: dict | None) -> "PipelineConfig":
        data = dict(data or {})
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise PreconditionError(f"unknown config keys: {unknown}")
        if data.get("window") is not None:
            data["window"] = tuple(float(v) for v in data["window"])
        return cls(**data)

    def updated(self, **kw) -> "PipelineConfig":
        return dataclasses.replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_dict(self):
        out = dataclasses.asdict(self)
        out["window"] = None if self.window is None else list(self.window)
        return out


def load_config(path) -> PipelineConfig:
    """Read a TOML or JSON config file."""
    path = Path(path)
    if path.suffix == ".toml":
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    else:
        data = json.loads(path.read_text())
    return PipelineConfig.from_mapping(data.get("pipeline", data))


def estimate_constants(space: FiniteMetricSpace, config: PipelineConfig | None = None, pm=None) -> dict:
    """Assouad ``(Q, D)``, Ahlfors ``C`` (when weights exist), LLC ``Lambda`` and quasiconvexity ``L``."""
    cfg = config or PipelineConfig()
    pm = path_metric(space) if pm is None else pm
    budget = cfg.budget
    out: dict = {"diagnostics": []}
    ass = assouad_dimension(space, window=cfg.window, budget=budget)
    out["assouad"] = ass.to_dict()
    if space.weight2 is not None:
        reg = ahlfors_regularity(space, window=cfg.window, budget=budget)
        out["ahlfors"] = reg.to_dict()
        if reg.scale_dependent:
            out["diagnostics"].append("Ahlfors ratio drifts with scale: not regular at the tested scales")
    else:
        reg = None
        out["ahlfors"] = None
    llc = llc_constants(space, window=cfg.window, budget=budget)
    out["llc"] = llc.to_dict()
    L, pair, n_bad = pm.quasiconvexity_factor(max_sources=min(space.n, 4 * cfg.max_centers), seed=cfg.seed)
    out["quasiconvexity"] = {"L": L, "worst_pair": list(pair), "n_disconnected": n_bad}
    if n_bad:
        out["diagnostics"].append(f"{n_bad} sampled pairs are disconnected at the connection radius")
    out["hypothesis"] = HypothesisConstants(Lam=llc.lam, L=L, Q=max(ass.Q, 1e-6), D=ass.D,
                                            C=4.0 if reg is None else reg.C).to_dict()
    return out


def _hypothesis(consts: dict) -> HypothesisConstants:
    h = consts["hypothesis"]
    return HypothesisConstants(Lam=h["Lambda"], L=h["L"], Q=h["Q"], D=h["D"], C=h["C"])


def quasiconvex_spot_checks(space, hyp: HypothesisConstants, config: PipelineConfig, pm=None) -> dict:
    """Quasiconvex paths between seeded random pairs (canonical order, so labels do not matter)."""
    pm = path_metric(space) if pm is None else pm
    rng = np.random.default_rng(config.seed)
    order = space.canonical_order
    k = Constants(C=hyp.C, Lam=hyp.Lam, Q=hyp.Q, D=hyp.D)
    rows, worst = [], 1.0
    for _ in range(config.quasiconvex_pairs):
        a, b = rng.choice(space.n, size=2, replace=False)
        x, y = int(order[a]), int(order[b])
        try:
            path = quasiconvex_path(space, x, y, constants=k, pm=pm)
        except QuasidiskError as exc:
            rows.append({"pair": [x, y], "error": str(exc)})
            continue
        rows.append({"pair": [x, y], "L_hat": path.ratio, "depth": path.depth, "n_fallback": path.n_fallback,
                     "diagnostics": path.diagnostics})
        worst = max(worst, path.ratio)
    return {"pairs": rows, "L_hat": worst}


def run_pipeline(space: FiniteMetricSpace, z: int, R: float, config: PipelineConfig | None = None) -> dict:
    """Compose constants, quasiconvexity spot checks, the chord-arc loop and domain verification.

    Stages that need a chart are skipped (and say so) when the space has
    none.  A scale above the guard raises :class:`GuardError` unless the
    config disables the guard.
    """
    cfg = config or PipelineConfig()
    if not 0 <= z < space.n:
        raise PreconditionError(f"center {z} out of range")
    pm = path_metric(space)
    report: dict = {"schema": SCHEMA, "version": __version__, "config": cfg.to_dict(), "seed": cfg.seed,
                    "budgets": cfg.budget.to_dict(), "input": {"n": space.n, "z": int(z), "R": float(R),
                                                               "h": space.h, "spacing": space.spacing},
                    "stages": {}, "diagnostics": []}
    stages = report["stages"]
    consts = estimate_constants(space, cfg, pm)
    stages["constants"] = consts
    report["diagnostics"].extend(consts["diagnostics"])
    hyp = _hypothesis(consts)
    qc = quasiconvex_spot_checks(space, hyp, cfg, pm)
    stages["quasiconvexity"] = qc

    if space.chart is None:
        for name in ("chord_arc", "domain", "verification"):
            stages[name] = {"skipped": "no chart"}
        report["passed"] = not report["diagnostics"]
        return report

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = chord_arc_pipeline(space, z, R, hyp, R0=cfg.R0, guard=cfg.guard, b0_radius=cfg.b0_radius,
                                 ball_divisor=cfg.ball_divisor, pm=pm)
    stages["chord_arc"] = res.to_dict()
    report["diagnostics"].extend(res.diagnostics if cfg.guard else
                                 [d for d in res.diagnostics if "guard disabled" not in d])
    try:
        dom = extract_domain(space, res.loop, z, R, res.constants["C2"], hyp.Lam)
    except QuasidiskError as exc:
        stages["domain"] = {"error": str(exc)}
        stages["verification"] = {"skipped": "no domain"}
        report["diagnostics"].append(f"domain extraction failed: {exc}")
        report["passed"] = False
        return report
    stages["domain"] = {"n_interior": int(dom.interior.size), "n_boundary": int(dom.boundary.size),
                        "checks": dom.checks, "diagnostics": dom.diagnostics}
    if cfg.verify:
        ver = verify_domain(space, dom, res.loop, hyp.Lam, res.certificate.lam, hyp.C, budget=cfg.budget)
        stages["verification"] = ver.to_dict()
        report["diagnostics"].extend(ver.diagnostics)
        ok = ver.passed
    else:
        stages["verification"] = {"skipped": "disabled by config"}
        ok = True
    report["passed"] = bool(ok and not report["diagnostics"])
    return report
