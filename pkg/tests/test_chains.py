import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import chain_score, dist_matrix, min_chain_cardinality, min_score
from quasidisk.chains import h_bound, minimal_chain, score, score_minimizing_chain
from quasidisk.errors import DisconnectedError, PreconditionError
from quasidisk.space import build_space


def random_case(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 13))
    p = rng.uniform(0, 1, (n, 2))
    d = dist_matrix(p)
    lo = float(np.sort(d, axis=1)[:, 1].max())
    eps = float(rng.uniform(0.7 * lo, lo + 0.3))
    x, y = (int(v) for v in rng.choice(n, 2, replace=False))
    ref = rng.choice(n, int(rng.integers(1, n + 1)), replace=False)
    Q = float(rng.choice([0.5, 1.0, 2.0]))
    return build_space(p), d, eps, x, y, ref, Q


@given(st.integers(0, 10_000))
def test_minimal_chain_matches_enumeration(seed):
    s, d, eps, x, y, _, _ = random_case(seed)
    expect = min_chain_cardinality(d, x, y, eps)
    if expect is None:
        with pytest.raises(DisconnectedError):
            minimal_chain(s, x, y, eps)
        return
    chain = minimal_chain(s, x, y, eps)
    assert len(chain) == expect
    assert chain.points[0] == x and chain.points[-1] == y


@given(st.integers(0, 10_000))
def test_score_minimizer_matches_enumeration(seed):
    s, d, eps, x, y, ref, Q = random_case(seed)
    expect, _ = min_score(d, x, y, eps, ref, Q)
    if expect is None:
        with pytest.raises(DisconnectedError):
            score_minimizing_chain(s, x, y, ref, eps, Q)
        return
    sc = score_minimizing_chain(s, x, y, ref, eps, Q)
    assert chain_score(d, sc.chain.points, eps, ref, Q) == expect
    assert sc.score == pytest.approx(score(s, sc.chain, ref, eps, Q), rel=1e-12)


def test_minimal_chain_separation_on_line():
    s = build_space(np.linspace(0, 1, 21))
    chain = minimal_chain(s, 0, 20, 0.25)
    assert len(chain) == 5
    gaps = chain.gaps(s)
    assert np.all(gaps <= 0.25 + 1e-12)


def test_single_point_chain_and_bad_eps():
    s = build_space(np.linspace(0, 1, 5))
    assert len(minimal_chain(s, 2, 2, 0.1)) == 1
    with pytest.raises(PreconditionError):
        minimal_chain(s, 0, 1, 0.0)


def test_score_zero_on_reference_and_exponent_zero_counts_points():
    s = build_space(np.linspace(0, 1, 11))
    chain = minimal_chain(s, 0, 10, 0.1)
    assert score(s, chain, np.arange(11), 0.1, 2.0) == len(chain)
    assert score(s, chain, [0], 0.1, 0.0) == 2 * len(chain)


def test_h_bound_formula_and_diagnostic():
    assert h_bound(4.0, 1.0, 1.0, 0.01, 2.0) == pytest.approx(16 ** 0.25 * 0.04 ** 0.5)
    p = np.c_[np.linspace(0, 1, 41), np.zeros(41)]
    p = np.vstack([p, np.c_[np.linspace(0, 1, 41)[1:-1], np.full(39, 0.3)]])
    s = build_space(p)
    ref = np.arange(41, 80)  # the upper line; chains along it deviate zero from the reference
    sc = score_minimizing_chain(s, 0, 40, ref, 0.05, 1.0, D=1e-8, lam=1e-8)
    assert sc.deviation > 0 and sc.diagnostics
