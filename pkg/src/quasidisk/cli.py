"""Command line entry point.

Exit codes: 0 when every check passes, 2 when the run finished with
diagnostics, 1 on errors.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import fixtures
from .coarea import Constants, quasiconvex_path
from .errors import QuasidiskError
from .io import FORMATS, dumps, ingest, read_report, save_bundle, write_csv
from .pipeline import PipelineConfig, _hypothesis, estimate_constants, load_config, run_pipeline
from .quasicircle import chord_arc_pipeline
from .render import render_svg
from .space import path_metric

EXIT_OK, EXIT_ERROR, EXIT_DIAGNOSTICS = 0, 1, 2


def _param(text: str):
    key, _, val = text.partition("=")
    if not _:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, float(val) if any(c in val for c in ".eE") else int(val)
    except ValueError:
        return key, val


def _add_space_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="point CSV, distance matrix, OFF/OBJ mesh or .npz bundle")
    src.add_argument("--fixture", choices=fixtures.KINDS, help="generate a fixture instead of reading a file")
    p.add_argument("--format", choices=FORMATS, help="input format (default: file extension)")
    p.add_argument("--n", type=int, default=2000, help="fixture resolution")
    p.add_argument("--param", type=_param, action="append", default=[], help="fixture parameter key=value")


def _add_run_args(p):
    p.add_argument("--config", help="TOML or JSON pipeline config")
    p.add_argument("--seed", type=int)
    p.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"), help="scale window")
    p.add_argument("--out", help="write the JSON report here (default: stdout)")


def _space(args):
    if args.fixture:
        return fixtures.generate(fixtures.FixtureSpec(args.fixture, n=args.n, params=dict(args.param),
                                                      seed=args.seed or 0))
    return ingest(args.input, args.format)


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    extra = {"seed": args.seed, "window": None if args.window is None else tuple(args.window)}
    if getattr(args, "guard_off", False):
        extra["guard"] = False
    if getattr(args, "b0_radius", None) is not None:
        extra["b0_radius"] = args.b0_radius
    return cfg.updated(**extra)


def _emit(report: dict, out) -> None:
    text = dumps(report)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _status(report: dict) -> int:
    return EXIT_OK if report.get("passed", not report.get("diagnostics")) else EXIT_DIAGNOSTICS


def cmd_generate(args):
    space = _space(args)
    if args.out.endswith(".csv"):
        write_csv(space, args.out)
    else:
        save_bundle(space, args.out)
    meta = {k: v for k, v in space.meta.items() if k != "polar"}
    sys.stdout.write(dumps({"n": space.n, "h": space.h, "spacing": space.spacing, "meta": meta}))
    return EXIT_OK


def cmd_ingest(args):
    space = _space(args)
    _emit({"n": space.n, "metric": space.metric, "h": space.h, "spacing": space.spacing, "diam": space.diam,
           "chart": space.chart is not None, "weights": space.weight2 is not None}, args.out)
    return EXIT_OK


def cmd_invariants(args):
    space = _space(args)
    cfg = _config(args)
    report = {"config": cfg.to_dict(), "constants": estimate_constants(space, cfg)}
    report["diagnostics"] = report["constants"]["diagnostics"]
    _emit(report, args.out)
    return _status(report)


def cmd_quasiconvex(args):
    space = _space(args)
    cfg = _config(args)
    pm = path_metric(space)
    rng = np.random.default_rng(cfg.seed)
    order = space.canonical_order
    rows, diagnostics = [], []
    for _ in range(args.pairs):
        a, b = rng.choice(space.n, size=2, replace=False)
        x, y = int(order[a]), int(order[b])
        path = quasiconvex_path(space, x, y, constants=Constants(), pm=pm)
        rows.append({"pair": [x, y], "L_hat": path.ratio, "depth": path.depth, "n_fallback": path.n_fallback})
        diagnostics.extend(path.diagnostics)
    _emit({"config": cfg.to_dict(), "pairs": rows, "L_hat": max(r["L_hat"] for r in rows),
           "diagnostics": diagnostics}, args.out)
    return EXIT_DIAGNOSTICS if diagnostics else EXIT_OK


def cmd_quasicircle(args):
    space = _space(args)
    cfg = _config(args)
    pm = path_metric(space)
    if args.constants:
        hyp = _hypothesis(read_report(args.constants)["constants"])
    else:
        hyp = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = chord_arc_pipeline(space, args.center, args.scale, hyp, R0=cfg.R0, guard=cfg.guard,
                                 b0_radius=cfg.b0_radius, ball_divisor=cfg.ball_divisor, pm=pm)
    report = {"config": cfg.to_dict(), "chord_arc": res.to_dict(),
              "diagnostics": [d for d in res.diagnostics if "guard disabled" not in d]}
    _emit(report, args.out)
    if args.svg:
        render_svg(space, {"loop": res.loop.points, "marks": [args.center]}, args.svg)
    return _status(report)


def cmd_pipeline(args):
    space = _space(args)
    cfg = _config(args)
    report = run_pipeline(space, args.center, args.scale, cfg)
    _emit(report, args.out)
    if args.svg and space.chart is not None and "loop" in report["stages"].get("chord_arc", {}):
        render_svg(space, {"loop": report["stages"]["chord_arc"]["loop"]["points"], "marks": [args.center]},
                   args.svg)
    return _status(report)


def cmd_render(args):
    space = _space(args)
    overlays = {}
    if args.report:
        rep = read_report(args.report)
        stage = rep.get("stages", rep).get("chord_arc", {})
        if "loop" in stage:
            overlays["loop"] = stage["loop"]["points"]
    render_svg(space, overlays, args.svg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quasidisk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a fixture to CSV or an .npz bundle")
    _add_space_args(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("ingest", help="load and summarize an input space")
    _add_space_args(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("invariants", help="estimate Assouad, Ahlfors, LLC and quasiconvexity constants")
    _add_space_args(p)
    _add_run_args(p)
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("quasiconvex", help="quasiconvex paths between random pairs")
    _add_space_args(p)
    _add_run_args(p)
    p.add_argument("--pairs", type=int, default=6)
    p.set_defaults(func=cmd_quasiconvex)

    for name, func, help_ in (("quasicircle", cmd_quasicircle, "chord-arc loop around a center"),
                              ("pipeline", cmd_pipeline, "full run with domain verification")):
        p = sub.add_parser(name, help=help_)
        _add_space_args(p)
        _add_run_args(p)
        p.add_argument("--center", type=int, required=True)
        p.add_argument("--scale", type=float, required=True)
        p.add_argument("--guard-off", action="store_true", help="allow scales above the guard (warns)")
        p.add_argument("--b0-radius", type=float, help="radius of the loop search ball")
        p.add_argument("--svg", help="also draw the loop")
        if name == "quasicircle":
            p.add_argument("--constants", help="invariants report supplying measured constants")
        p.set_defaults(func=func)

    p = sub.add_parser("render", help="draw a space and the loop of a report as SVG")
    _add_space_args(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--report")
    p.add_argument("--svg", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (QuasidiskError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
