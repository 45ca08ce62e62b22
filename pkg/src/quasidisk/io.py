"""Reading spaces from CSV, distance matrices and OFF/OBJ meshes; JSON reports."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .errors import MetricError, PreconditionError
from .space import FiniteMetricSpace, build_space

SCHEMA = "quasidisk.report/1"
FORMATS = ("csv", "matrix", "off", "obj", "npz")


def _fail(path, msg):
    raise PreconditionError(f"{path}: {msg}")


def read_csv(path) -> np.ndarray:
    """Numeric point rows (one optional header line); every row must have the same column count."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                if lineno == 1 and not rows:
                    continue  # header
                _fail(path, f"row {lineno} is not numeric: {row!r}")
            if len(rows[-1]) != len(rows[0]):
                _fail(path, f"row {lineno} has {len(rows[-1])} columns, expected {len(rows[0])}")
    if not rows:
        _fail(path, "no data rows")
    return np.asarray(rows, dtype=float)


def read_matrix(path) -> np.ndarray:
    """Square distance matrix from ``.npy`` or delimited text."""
    path = Path(path)
    if path.suffix == ".npy":
        d = np.load(path)
    else:
        text = path.read_text()
        if not text.strip():
            _fail(path, "empty file")
        d = read_csv(path) if "," in text else np.loadtxt(path, ndmin=2)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        _fail(path, f"matrix must be square, got shape {d.shape}")
    return d


def _mesh_faces_to_edges(verts, faces):
    edges = set()
    for f in faces:
        for a, b in zip(f, f[1:] + f[:1]):
            if a == b:
                continue
            if not (0 <= a < len(verts) and 0 <= b < len(verts)):
                raise PreconditionError(f"face refers to missing vertex {max(a, b)}")
            edges.add((min(a, b), max(a, b)))
    if not edges:
        raise PreconditionError("mesh has no edges")
    e = np.array(sorted(edges))
    w = np.linalg.norm(verts[e[:, 0]] - verts[e[:, 1]], axis=1)
    return [(int(i), int(j), float(x)) for (i, j), x in zip(e, w)]


def read_off(path):
    """Vertices and faces of an OFF mesh."""
    tokens = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.append(line.split())
    if not tokens:
        _fail(path, "empty file")
    head = tokens[0]
    if head[0].upper() != "OFF":
        _fail(path, "missing OFF header")
    rest = head[1:] if len(head) > 1 else None
    body = tokens[1:] if rest is None else [rest] + tokens[1:]
    try:
        nv, nf = int(body[0][0]), int(body[0][1])
        verts = np.array([[float(x) for x in t[:3]] for t in body[1:1 + nv]])
        faces = [[int(x) for x in t[1:1 + int(t[0])]] for t in body[1 + nv:1 + nv + nf]]
    except (ValueError, IndexError) as exc:
        _fail(path, f"malformed OFF body: {exc}")
    if len(verts) != nv or len(faces) != nf:
        _fail(path, "OFF counts do not match the body")
    return verts, faces


def read_obj(path):
    """Vertices and faces of a Wavefront OBJ mesh (``v`` and ``f`` records only)."""
    verts, faces = [], []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        try:
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(p.split("/")[0]) - 1 for p in parts[1:]])
        except ValueError:
            _fail(path, f"malformed line {lineno}: {line!r}")
    if not verts:
        _fail(path, "no vertices")
    return np.asarray(verts, dtype=float), faces


def _mesh_space(verts, faces, **kw):
    edges = _mesh_faces_to_edges(verts, faces)
    chart = verts[:, :2] if np.ptp(verts[:, 2]) == 0 else None
    return build_space(edges=edges, n=len(verts), chart=chart, meta={"vertices": verts}, **kw)


def ingest(path, format: str | None = None, **kw) -> FiniteMetricSpace:
    """Load a space from ``path``; the format defaults to the file extension.

    ``csv``: point coordinates (2-column files also become the chart).
    ``matrix``: full distance matrix.  ``off``/``obj``: mesh edge-graph
    metric with Euclidean edge lengths.  ``npz``: a bundle written by
    :func:`save_bundle`.
    """
    path = Path(path)
    if not path.exists():
        raise PreconditionError(f"{path}: no such file")
    fmt = (format or path.suffix.lstrip(".")).lower()
    fmt = {"npy": "matrix", "txt": "matrix"}.get(fmt, fmt)
    if fmt not in FORMATS:
        raise PreconditionError(f"unknown format {fmt!r}; choose from {FORMATS}")
    if path.stat().st_size == 0:
        _fail(path, "empty file")
    if fmt == "csv":
        p = read_csv(path)
        return build_space(p, chart=p if p.shape[1] == 2 else None, **kw)
    if fmt == "matrix":
        return build_space(matrix=read_matrix(path), **kw)
    if fmt == "off":
        return _mesh_space(*read_off(path), **kw)
    if fmt == "obj":
        return _mesh_space(*read_obj(path), **kw)
    return load_bundle(path, **kw)


def save_bundle(space: FiniteMetricSpace, path) -> None:
    """Write coordinates or matrix, chart, weights and exponent to an ``.npz`` file."""
    arrays = {"exponent": np.array(space.exponent), "scale": np.array(space.scale), "h": np.array(space.h),
              "metric": np.array(space.metric)}
    for name in ("coords", "matrix", "chart", "weight2"):
        val = getattr(space, name)
        if val is not None:
            arrays[name] = val
    np.savez(path, **arrays)


def load_bundle(path, **kw) -> FiniteMetricSpace:
    with np.load(path) as z:
        data = {k: z[k] for k in z.files}
    metric = str(data["metric"])
    src = {"matrix": data["matrix"]} if "matrix" in data else {"coords": data["coords"], "metric": metric}
    space = build_space(**src, exponent=float(data["exponent"]), chart=data.get("chart"),
                        weight2=data.get("weight2"), h=float(data["h"]), **kw)
    if float(data["scale"]) != 1.0:
        space = dataclasses.replace(space, scale=float(data["scale"]))
    return space


def write_csv(space: FiniteMetricSpace, path) -> None:
    if space.coords is None:
        raise MetricError("space has no coordinates; write a bundle instead")
    np.savetxt(path, space.coords, delimiter=",", fmt="%.17g")


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def to_jsonable(obj):
    """Plain-JSON view: numpy scalars and arrays unwrapped, non-finite floats as strings."""
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report: dict) -> str:
    """Canonical JSON text: schema tag, sorted keys, two-space indent, trailing newline."""
    body = dict(report)
    body.setdefault("schema", SCHEMA)
    return json.dumps(to_jsonable(body), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(report: dict, path) -> None:
    Path(path).write_text(dumps(report))


def read_report(path) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("schema") != SCHEMA:
        raise PreconditionError(f"{path}: unsupported report schema {data.get('schema')!r}")
    return data
