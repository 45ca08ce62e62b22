import math

import numpy as np
import pytest

from quasidisk import fixtures
from quasidisk.errors import PreconditionError
from quasidisk.invariants import assouad_dimension


@pytest.mark.parametrize("kind", fixtures.KINDS)
def test_fixtures_are_deterministic_and_documented(kind):
    spec = fixtures.FixtureSpec(kind, n=600, seed=3)
    a, b = fixtures.generate(spec), fixtures.generate(spec)
    src = "coords" if a.coords is not None else "matrix"
    np.testing.assert_array_equal(getattr(a, src), getattr(b, src))
    assert a.meta["fixture"]["kind"] == kind
    for entry in a.meta["expected"].values():
        assert entry["provenance"] in ("trivial", "derived")


def test_grid_construction():
    g = fixtures.generate(fixtures.FixtureSpec("grid", n=10_000))
    assert g.n == 10_000
    h = g.meta["grid_spacing"]
    np.testing.assert_allclose(g.weight2, h * h)
    assert g.weight2.sum() == pytest.approx(1.0)


def test_snowflake_dimension():
    s = fixtures.generate(fixtures.FixtureSpec("snowflake", n=2000, params={"alpha": 0.5}))
    assert assouad_dimension(s).Q == pytest.approx(2.0, abs=0.3)


def test_cone_metric_and_chart():
    c = fixtures.cone(n=800)
    polar = c.meta["polar"]
    # points on either side of the seam are close on the cone
    a = int(np.argmin(np.hypot(polar[:, 0] - 0.5, polar[:, 1] - 0.05)))
    b = int(np.argmin(np.hypot(polar[:, 0] - 0.5, polar[:, 1] - (1.5 * math.pi - 0.05))))
    assert c.dist(a, b) < 0.1
    assert c.dist(0, a) == pytest.approx(polar[a, 0])


def test_sphere_chordal_metric():
    s = fixtures.sphere(n=500)
    assert s.diam <= 2.0 + 1e-12
    assert np.allclose(np.linalg.norm(s.coords, axis=1), 1.0)


def test_invalid_specs():
    with pytest.raises(PreconditionError):
        fixtures.FixtureSpec("torus")
    with pytest.raises(PreconditionError):
        fixtures.generate(fixtures.FixtureSpec("grid", params={"bogus": 1}))
    with pytest.raises(PreconditionError):
        fixtures.snowflake(alpha=1.5)
