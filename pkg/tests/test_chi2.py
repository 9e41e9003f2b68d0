import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from egoclique.chi2 import (
    ANGLES, _leading_pair, chi2_critical, chi2_detect, chi2_from_pcs, quadrant_chi2, quadrant_table,
    residual_pcs, residual_points, table_chi2,
)
from egoclique.fit import FittedModel, fit_chunglu, fit_er
from egoclique.graph import Graph
from egoclique.models import Rates, choose_clique, embed_clique, generate, make_simulation_spec
from oracles import chi2_1_quantile


def points_with_counts(c):
    """Points placed in the four quadrants with the given counts (++, +-, -+, --)."""
    pts = []
    for (sx, sy), k in zip([(1, 1), (1, -1), (-1, 1), (-1, -1)], c):
        pts += [(sx * (1 + 0.01 * i), sy * (1 + 0.02 * i)) for i in range(k)]
    x = np.array(pts)
    return x[:, 0], x[:, 1]


def test_table_examples():
    assert table_chi2([[25, 25], [25, 25]]) == 0.0
    assert table_chi2([[50, 0], [0, 50]]) == pytest.approx(100.0)
    assert table_chi2([[10, 5], [0, 0]]) == 0.0
    x1, x2 = points_with_counts((50, 0, 0, 50))
    # the rotation angle 0 is the grid point 2*pi
    assert quadrant_chi2(x1, x2, 2 * math.pi) == pytest.approx(100.0)
    assert quadrant_table(x1, x2, 0.0).tolist() == [[50, 0], [0, 50]]


def test_zero_counts_as_positive():
    assert quadrant_table([0.0], [0.0], 0.0).tolist() == [[1, 0], [0, 0]]
    assert quadrant_table([-1.0], [0.0], 0.0).tolist() == [[0, 0], [1, 0]]


def test_all_points_in_one_quadrant():
    x = np.linspace(1, 2, 20)
    assert quadrant_chi2(x, x + 1, 0.0) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=2, max_size=40),
       st.integers(1, 32), st.integers(-2, 3))
def test_rotation_invariance(pts, k, quarter):
    x = np.array(pts)
    # avoid points that land within rounding distance of an axis
    ang = k * math.pi / 16
    for a in (ang, ang + quarter * math.pi / 2):
        c, s = math.cos(a), math.sin(a)
        u, v = c * x[:, 0] + s * x[:, 1], -s * x[:, 0] + c * x[:, 1]
        if np.min(np.abs(np.concatenate([u, v]))) < 1e-9:
            return
    base = quadrant_chi2(x[:, 0], x[:, 1], ang)
    assert quadrant_chi2(x[:, 0], x[:, 1], ang + quarter * math.pi / 2) == pytest.approx(base, rel=1e-12)
    assert quadrant_chi2(x[:, 0], x[:, 1], ang + 2 * math.pi) == pytest.approx(base, rel=1e-12)


def test_length_mismatch():
    with pytest.raises(ValueError):
        quadrant_table([1.0, 2.0], [1.0], 0.0)


def test_critical_value():
    assert chi2_critical(0.01) == pytest.approx(6.6349, abs=5e-5)
    for a in (0.01, 0.02, 0.05, 0.3):
        assert chi2_critical(a) == pytest.approx(chi2_1_quantile(1 - a), abs=1e-10)
    with pytest.raises(ValueError):
        chi2_critical(1.0)


def test_grid_and_report_invariants():
    assert len(ANGLES) == 32
    assert ANGLES[0] == pytest.approx(math.pi / 16) and ANGLES[-1] == pytest.approx(2 * math.pi)
    rng = np.random.default_rng(0)
    x1, x2 = rng.normal(size=80), rng.normal(size=80)
    rep = chi2_from_pcs(x1, x2, 0.05)
    assert rep.quadrant_tables.shape == (32, 2, 2)
    assert rep.angle in ANGLES
    assert all(rep.statistic >= quadrant_chi2(x1, x2, a) for a in ANGLES)
    assert rep.statistic >= 0
    assert rep.reject == (rep.statistic > rep.critical_value)


def test_residual_pcs_rank_two():
    # u and v on disjoint supports: u v^T + v u^T is diagonal-free and rank two
    n = 40
    rng = np.random.default_rng(1)
    u = np.where(np.arange(n) < 20, rng.uniform(0.1, 0.3, n), 0.0)
    v = np.where(np.arange(n) >= 20, rng.uniform(0.1, 0.3, n), 0.0)
    r = np.outer(u, v) + np.outer(v, u)
    x1, x2 = _leading_pair(r)
    basis, _ = np.linalg.qr(np.stack([u, v], axis=1))
    for x in (x1, x2):
        assert np.linalg.norm(basis.T @ x) == pytest.approx(1.0, abs=1e-12)
        assert x[np.argmax(np.abs(x))] > 0
    assert abs(x1 @ x2) < 1e-12
    # the canonical sign does not depend on the solver's arbitrary choice
    y1, _ = _leading_pair(r[::-1, ::-1])
    np.testing.assert_allclose(y1[::-1], x1, atol=1e-12)


def test_residual_pcs_against_dense_oracle():
    spec = make_simulation_spec("er", 150)
    g = embed_clique(generate(spec, 0), choose_clique(150, 8, 1))
    fm = fit_er(g)
    x1, x2 = residual_pcs(g, fm)
    r = g.to_dense() - fm.rates.dense()
    w, v = np.linalg.eigh(r)
    order = np.argsort(-np.abs(w))[:2]
    for got, ref in zip((x1, x2), v[:, order].T):
        ref = ref * np.sign(ref[np.argmax(np.abs(ref))])
        np.testing.assert_allclose(got, ref, atol=1e-9)
        assert got[np.argmax(np.abs(got))] > 0
        assert np.linalg.norm(got) == pytest.approx(1.0)


def test_residual_pcs_sparse_path_matches_dense():
    spec = make_simulation_spec("er", 400)
    g = embed_clique(generate(spec, 0), choose_clique(400, 15, 1))
    fm = fit_er(g)
    x1, x2 = residual_pcs(g, fm)
    r = g.to_dense() - fm.rates.dense()
    w, v = np.linalg.eigh(r)
    order = np.argsort(-np.abs(w))[:2]
    for got, ref in zip((x1, x2), v[:, order].T):
        ref = ref * np.sign(ref[np.argmax(np.abs(ref))])
        np.testing.assert_allclose(got, ref, atol=1e-7)


def test_zero_residual_rows_are_dropped():
    spec = make_simulation_spec("chunglu", 200, seed=0)
    g = generate(spec, 0)
    fm = fit_chunglu(g)
    x1, x2 = residual_points(g, fm)
    isolated = int((g.degrees() == 0).sum())
    assert isolated > 0
    assert x1.size == g.n - isolated


def test_perfect_fit_gives_zero():
    g = Graph.from_dense(np.ones((5, 5), dtype=int) - np.eye(5, dtype=int))
    rep = chi2_detect(g, fit_er(g), 0.05)
    assert rep.statistic == 0.0 and not rep.reject


def test_detects_clique_under_er():
    spec = make_simulation_spec("er", 300)
    g = embed_clique(generate(spec, 5), choose_clique(300, 12, 6))
    rep = chi2_detect(g, fit_er(g), 0.01)
    assert rep.reject
