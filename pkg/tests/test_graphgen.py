import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_edges, pair_uniform_oracle
from sfperc import theory
from sfperc.errors import InvalidParameterError
from sfperc.graphgen import (
    ModelParams,
    PairRandom,
    adjoin_point,
    build_graph,
    build_graph_cell,
    build_graph_naive,
    decide_pairs,
    degree,
    edge_prob,
    from_edges,
    incident_edges,
    pair_uniform,
)
from sfperc.pointprocess import BoxGeometry, PointSet, sample_ppp
from sfperc.validation import graph_invariant_violations
from sfperc.weights import WeightLaw, WeightVector, sample_weights

PARETO3 = WeightLaw.pareto(3.0)


def _sample(d, side, lam, law, seed, topology="torus"):
    ps = sample_ppp(BoxGeometry(d, side, topology), lam, seed)
    return ps, sample_weights(law, len(ps), seed + 1)


def test_model_params():
    p = ModelParams(2, 4.0, WeightLaw.pareto(2.5))
    assert p.gamma == 4.0 * 1.5 / 2
    assert ModelParams.from_dict(p.to_dict()) == p
    for bad in [(0, 4.0), (2, 0.0), (2, math.inf)]:
        with pytest.raises(InvalidParameterError):
            ModelParams(bad[0], bad[1], PARETO3)
    with pytest.raises(InvalidParameterError):
        ModelParams(2, 4.0, PARETO3, intensity=0.0)


def test_edge_prob_examples():
    assert edge_prob(2.0, 8.0, 2.0, 4.0) == pytest.approx(1 - math.exp(-1), rel=1e-15)
    assert edge_prob(3.0, 3.0, 3.0, 2.0) == pytest.approx(0.6321206, abs=1e-7)
    assert edge_prob(1.0, 1.0, 1e12, 2.0) < 1e-20
    assert edge_prob(1.0, 1.0, 0.0, 2.0) == 1.0


@given(st.floats(0.1, 50), st.floats(0.1, 50), st.floats(0.01, 100), st.floats(0.01, 100), st.floats(0.5, 8))
def test_edge_prob_properties(wx, wy, r1, r2, alpha):
    p = edge_prob(wx, wy, r1, alpha)
    assert 0.0 <= p <= 1.0
    assert p == edge_prob(wy, wx, r1, alpha)
    lo, hi = sorted((r1, r2))
    assert edge_prob(wx, wy, lo, alpha) >= edge_prob(wx, wy, hi, alpha)


def test_pair_uniform_matches_independent_hash():
    for seed in (0, 1, 2 ** 40 + 3, 2 ** 63 - 1):
        for i, j in ((0, 1), (5, 3), (123456, 7), (0, 2 ** 31 - 1)):
            assert pair_uniform(seed, i, j) == pair_uniform_oracle(seed, i, j)
    r = PairRandom(42)
    assert r(3, 9) == r(9, 3)
    assert np.array_equal(r(np.arange(5), 7), [r(k, 7) for k in range(5)])


def test_pair_uniform_distribution_and_serial_correlation():
    i = np.arange(200_000)
    u = pair_uniform(2024, i, i + 1)
    assert np.all((u >= 0) & (u < 1))
    assert abs(u.mean() - 0.5) <= 4 * math.sqrt(1 / 12 / u.size)
    r = np.corrcoef(u[:-1], u[1:])[0, 1]
    assert abs(r) <= 4 / math.sqrt(u.size)


@pytest.mark.parametrize("d,topology", [(1, "torus"), (2, "free"), (3, "torus")])
def test_engines_match_brute_force(d, topology):
    side = {1: 60.0, 2: 9.0, 3: 4.5}[d]
    params = ModelParams(d, 1.5 * d + 1.0, WeightLaw.pareto(2.7))
    ps, wv = _sample(d, side, 1.0, params.law, 11 + d, topology)
    oracle = brute_edges(ps.points.tolist(), wv.values.tolist(), params.alpha, side, topology == "torus", 77)
    assert build_graph_naive(ps, wv, params, 77).edge_set() == oracle
    assert build_graph_cell(ps, wv, params, 77).edge_set() == oracle


@given(st.integers(0, 2 ** 62), st.integers(1, 3), st.sampled_from(["torus", "free"]),
       st.floats(0.4, 9.0), st.floats(1.2, 4.0), st.integers(1, 6))
def test_engine_equivalence_property(seed, d, topology, alpha, tau, cells):
    side = {1: 150.0, 2: 14.0, 3: 6.0}[d]
    params = ModelParams(d, alpha, WeightLaw.pareto(tau))
    ps, wv = _sample(d, side, 1.0, params.law, seed % 2 ** 40, topology)
    a = build_graph_naive(ps, wv, params, seed)
    b = build_graph_cell(ps, wv, params, seed, cell_side=side / cells)
    assert a.same_edges(b)
    assert graph_invariant_violations(a) == []


def test_thread_count_does_not_change_edges():
    params = ModelParams(2, 3.0, WeightLaw.pareto(2.2))
    ps, wv = _sample(2, 30.0, 1.0, params.law, 5)
    base = build_graph_cell(ps, wv, params, 9)
    assert base.same_edges(build_graph_cell(ps, wv, params, 9, threads=3))
    assert base.same_edges(build_graph_naive(ps, wv, params, 9, threads=2))


def test_empty_and_tiny_graphs():
    params = ModelParams(2, 4.0, PARETO3)
    g = BoxGeometry(2, 5.0)
    empty = PointSet(g, np.zeros((0, 2)), 1.0, 0)
    wv = WeightVector(np.zeros(0), 0, PARETO3)
    for engine in ("naive", "cell"):
        e = build_graph(empty, wv, params, 1, engine=engine)
        assert e.n_vertices == 0 and e.n_edges == 0
    # huge weights force p > 1 - 1e-12 for a close pair
    ps = PointSet(g, [[0.0, 0.0], [0.5, 0.0]], 1.0, 0)
    big = WeightVector([1e6, 1e6], 0, PARETO3)
    assert build_graph_naive(ps, big, params, 3).edge_set() == {(0, 1)}
    with pytest.raises(InvalidParameterError):
        build_graph(ps, WeightVector([1.0], 0, PARETO3), params, 0)
    with pytest.raises(InvalidParameterError):
        build_graph(ps, big, params, 0, engine="fast")


def test_three_vertices_and_degree():
    params = ModelParams(2, 2.0, PARETO3)
    ps = PointSet(BoxGeometry(2, 10.0), [[0, 0], [1, 0], [0, 1]], 1.0, 0)
    wv = WeightVector([1.0, 2.0, 3.0], 0, PARETO3)
    g = build_graph_naive(ps, wv, params, 5)
    assert 0 <= g.n_edges <= 3
    assert sum(degree(g, i) for i in range(3)) == 2 * g.n_edges
    assert graph_invariant_violations(g) == []
    tri = from_edges(ps, wv, params, [0, 0, 1], [1, 2, 2], "naive", 0)
    assert [degree(tri, i) for i in range(3)] == [2, 2, 2]
    iso = from_edges(ps, wv, params, [0], [1], "naive", 0)
    assert degree(iso, 2) == 0


def test_decide_pairs_and_incident_agree_with_graph():
    params = ModelParams(2, 3.0, WeightLaw.pareto(2.5))
    ps, wv = _sample(2, 20.0, 1.0, params.law, 8)
    g = build_graph_cell(ps, wv, params, 31)
    i, j = np.triu_indices(len(ps), 1)
    ind = decide_pairs(ps, wv, params, 31, i, j)
    assert set(zip(i[ind].tolist(), j[ind].tolist())) == g.edge_set()
    for c in (0, 7, len(ps) - 1):
        assert np.array_equal(incident_edges(ps, wv, params, 31, c), g.neighbors(c))


def test_mean_degree_matches_boxed_campbell():
    # d=1, n=50, alpha=2, Pareto tau=3: mean degree over 100 seeds vs the boxed integral averaged over W
    params = ModelParams(1, 2.0, PARETO3)
    geom = BoxGeometry(1, 50.0)
    means = []
    for s in range(100):
        ps, wv = _sample(1, 50.0, 1.0, PARETO3, 1000 + 2 * s)
        g = build_graph_cell(ps, wv, params, s)
        means.append(g.degrees.mean() if g.n_vertices else 0.0)
    # on the torus every vertex sees the same boxed integral; average it over the weight law
    u_nodes, u_w = np.polynomial.legendre.leggauss(40)
    # substitute w = u^(-1/2) for Pareto(3); split (0, 1) geometrically to resolve the u -> 0 end
    expected = 0.0
    edges = np.geomspace(1e-10, 1.0, 12)
    for lo, hi in zip(np.r_[0.0, edges[:-1]], edges):
        u = 0.5 * (hi - lo) * (u_nodes + 1) + lo
        vals = [theory.annealed_mean_degree(params, geom, x ** -0.5) for x in u]
        expected += 0.5 * (hi - lo) * float(np.dot(u_w, vals))
    means = np.asarray(means)
    # the origin's own count is Poisson, so use the sample spread of per-seed means
    assert abs(means.mean() - expected) <= 4 * means.std(ddof=1) / math.sqrt(means.size)


def test_conditional_independence_of_edges():
    params = ModelParams(2, 3.0, WeightLaw.pareto(2.5))
    ps = PointSet(BoxGeometry(2, 10.0), [[0, 0], [1.0, 0], [0, 1.2], [2, 2]], 1.0, 0)
    wv = WeightVector([1.0, 1.5, 1.2, 2.0], 0, params.law)
    a = np.array([decide_pairs(ps, wv, params, s, [0], [1])[0] for s in range(10_000)], dtype=float)
    b = np.array([decide_pairs(ps, wv, params, s, [2], [3])[0] for s in range(10_000)], dtype=float)
    assert abs(a.mean() - edge_prob(1.0, 1.5, 1.0, 3.0)) <= 4 * a.std() / 100
    assert abs(np.corrcoef(a, b)[0, 1]) <= 4 / 100


@given(st.integers(0, 2 ** 40), st.floats(1.0, 100.0))
def test_monotone_coupling_in_weight(seed, factor):
    params = ModelParams(2, 3.0, WeightLaw.pareto(2.5))
    ps, wv = _sample(2, 12.0, 1.0, params.law, seed)
    if len(ps) == 0:
        return
    g = build_graph_cell(ps, wv, params, seed)
    vals = wv.values.copy()
    vals[0] *= factor
    g2 = build_graph_cell(ps, WeightVector(vals, wv.seed, wv.law), params, seed)
    assert set(g.neighbors(0).tolist()) <= set(g2.neighbors(0).tolist())


def test_adjoin_point_appends_last():
    ps, wv = _sample(2, 10.0, 1.0, PARETO3, 3)
    ps2, wv2 = adjoin_point(ps, wv, [0.0, 0.0], 2.5)
    assert len(ps2) == len(ps) + 1 and np.array_equal(ps2.points[-1], [0.0, 0.0]) and wv2.values[-1] == 2.5


def test_cell_engine_faster_than_naive():
    params = ModelParams(2, 4.0, WeightLaw.pareto(2.5))
    ps, wv = _sample(2, 100.0, 1.0, params.law, 12)
    build_graph_cell(ps, wv, params, 1)
    a = build_graph_cell(ps, wv, params, 1)
    b = build_graph_naive(ps, wv, params, 1)
    assert a.same_edges(b)
    assert a.meta["runtime_ms"] < b.meta["runtime_ms"]
