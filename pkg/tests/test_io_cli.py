import json
import math

import networkx as nx
import numpy as np
import pytest

from quasidisk import cli, fixtures
from quasidisk.errors import ChartError, PreconditionError
from quasidisk.io import SCHEMA, dumps, ingest, read_report, save_bundle, to_jsonable
from quasidisk.pipeline import PipelineConfig, load_config, run_pipeline
from quasidisk.render import render_svg
from quasidisk.space import build_space


def test_csv_roundtrip_and_errors(tmp_path):
    p = np.random.default_rng(0).uniform(size=(30, 2))
    path = tmp_path / "pts.csv"
    path.write_text("x,y\n" + "\n".join(f"{a},{b}" for a, b in p))
    s = ingest(path)
    assert s.n == 30 and s.chart is not None
    assert s.dist(0, 1) == pytest.approx(np.hypot(*(p[0] - p[1])))
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,oops\n")
    with pytest.raises(PreconditionError, match="row 2"):
        ingest(bad)
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1,2\n3,4,5\n")
    with pytest.raises(PreconditionError, match="columns"):
        ingest(ragged)
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(PreconditionError, match="empty"):
        ingest(empty)


def test_matrix_formats(tmp_path):
    d = np.array([[0, 1, 2], [1, 0, 1.5], [2, 1.5, 0]])
    np.save(tmp_path / "d.npy", d)
    np.savetxt(tmp_path / "d.txt", d)
    for name in ("d.npy", "d.txt"):
        assert ingest(tmp_path / name).dist(0, 2) == 2.0


def _grid_mesh(m=6):
    v = np.array([[i, j, 0.0] for j in range(m) for i in range(m)]) / (m - 1)
    faces = [[j * m + i, j * m + i + 1, (j + 1) * m + i + 1] for j in range(m - 1) for i in range(m - 1)]
    faces += [[j * m + i, (j + 1) * m + i + 1, (j + 1) * m + i] for j in range(m - 1) for i in range(m - 1)]
    return v, faces


def test_off_and_obj_meshes_give_edge_graph_metric(tmp_path):
    v, faces = _grid_mesh()
    off = tmp_path / "m.off"
    off.write_text("OFF\n" + f"{len(v)} {len(faces)} 0\n" + "\n".join(" ".join(map(str, x)) for x in v) + "\n"
                   + "\n".join("3 " + " ".join(map(str, f)) for f in faces) + "\n")
    obj = tmp_path / "m.obj"
    obj.write_text("\n".join("v " + " ".join(map(str, x)) for x in v) + "\n"
                   + "\n".join("f " + " ".join(str(k + 1) for k in f) for f in faces) + "\n")
    a, b = ingest(off), ingest(obj)
    g = nx.Graph()
    for f in faces:
        for x, y in zip(f, f[1:] + f[:1]):
            g.add_edge(x, y, weight=float(np.linalg.norm(v[x] - v[y])))
    ref = nx.single_source_dijkstra_path_length(g, 0)
    for k in range(len(v)):
        assert a.dist(0, k) == pytest.approx(ref[k]) == b.dist(0, k)
        assert a.dist(0, k) >= np.linalg.norm(v[0] - v[k]) - 1e-12
    bad = tmp_path / "bad.off"
    bad.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n")
    with pytest.raises(PreconditionError):
        ingest(bad)


def test_bundle_roundtrip(tmp_path):
    c = fixtures.cone(n=300)
    save_bundle(c, tmp_path / "c.npz")
    d = ingest(tmp_path / "c.npz")
    np.testing.assert_allclose(d.pairwise(np.arange(10)), c.pairwise(np.arange(10)))
    np.testing.assert_array_equal(d.chart, c.chart)


def test_json_encoding():
    text = dumps({"x": math.inf, "y": np.float64(1.5), "z": np.arange(3), "w": (1, None), "n": math.nan})
    data = json.loads(text)
    assert data == {"schema": SCHEMA, "x": "inf", "y": 1.5, "z": [0, 1, 2], "w": [1, None], "n": "nan"}
    assert text.endswith("\n")
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_render_counts_and_chart_requirement(tmp_path):
    s = fixtures.flat_disk(n=300)
    svg = render_svg(s, {"loop": [0, 1, 2, 3, 4], "arc": [5, 6, 7], "marks": [0]}, tmp_path / "x.svg")
    assert svg.count('class="loop"') == 5 and svg.count('class="arc"') == 2
    bands = np.full(s.n, -1)
    bands[:40] = np.arange(40) % 3
    assert render_svg(s, {"bands": bands}).count('class="band"') == 40
    with pytest.raises(ChartError):
        render_svg(build_space(np.arange(4.0)))


def test_config_files(tmp_path):
    (tmp_path / "c.toml").write_text("[pipeline]\nseed = 7\nguard = false\nwindow = [0.1, 0.4]\n")
    (tmp_path / "c.json").write_text(json.dumps({"seed": 7, "quasiconvex_pairs": 2}))
    a = load_config(tmp_path / "c.toml")
    assert a.seed == 7 and not a.guard and a.window == (0.1, 0.4)
    assert load_config(tmp_path / "c.json").quasiconvex_pairs == 2
    with pytest.raises(PreconditionError):
        PipelineConfig.from_mapping({"nope": 1})


def test_pipeline_without_chart_is_partial():
    s = fixtures.sphere(n=3000)
    s = build_space(s.coords, weight2=s.weight2)
    rep = run_pipeline(s, 0, 0.3, PipelineConfig(quasiconvex_pairs=2))
    assert rep["stages"]["chord_arc"] == {"skipped": "no chart"}
    assert rep["stages"]["quasiconvexity"]["L_hat"] <= math.pi / 2 + 0.2


def test_cli_exit_codes(tmp_path, capsys):
    disk = fixtures.flat_disk(n=1500)
    z = fixtures.center_index(disk)
    out = tmp_path / "r.json"
    svg = tmp_path / "l.svg"
    args = ["pipeline", "--fixture", "flat-disk", "--n", "1500", "--center", str(z), "--scale", "0.3",
            "--out", str(out), "--svg", str(svg)]
    assert cli.main(args) == 1  # guard refusal is an error
    assert "guard" in capsys.readouterr().err
    assert cli.main(args + ["--guard-off"]) == 0
    rep = read_report(out)
    assert rep["passed"] and rep["schema"] == SCHEMA and "config" in rep and "budgets" in rep
    assert svg.read_text().count('class="loop"') == len(rep["stages"]["chord_arc"]["loop"]["points"])
    # a strip is not Ahlfors regular across scales: diagnostics, exit 2
    assert cli.main(["invariants", "--fixture", "strip", "--n", "2000", "--window", "0.1", "5.0",
                     "--out", str(tmp_path / "i.json")]) == 2
    assert cli.main(["ingest", "--input", str(tmp_path / "missing.csv")]) == 1


def test_cli_generate_ingest_render(tmp_path, capsys):
    csv = tmp_path / "g.csv"
    assert cli.main(["generate", "--fixture", "grid", "--n", "400", "--out", str(csv)]) == 0
    assert cli.main(["ingest", "--input", str(csv), "--out", str(tmp_path / "s.json")]) == 0
    info = json.loads((tmp_path / "s.json").read_text())
    assert info["n"] == 400 and info["chart"]
    assert cli.main(["quasiconvex", "--input", str(csv), "--pairs", "3"]) == 0
    disk = tmp_path / "d.npz"
    assert cli.main(["generate", "--fixture", "flat-disk", "--n", "1500", "--out", str(disk)]) == 0
    z = fixtures.center_index(ingest(disk))
    rep = tmp_path / "q.json"
    assert cli.main(["quasicircle", "--input", str(disk), "--center", str(z), "--scale", "0.3", "--guard-off",
                     "--out", str(rep)]) == 0
    assert cli.main(["render", "--input", str(disk), "--report", str(rep), "--svg", str(tmp_path / "r.svg")]) == 0
    assert (tmp_path / "r.svg").read_text().count('class="loop"') > 10
