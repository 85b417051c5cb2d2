"""Graph invariants and the fast self-check suite."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from . import theory
from .estimators import clustering, components
from .graphgen import ModelParams, WeightedGraph, build_graph_cell, build_graph_naive
from .pointprocess import BoxGeometry, sample_ppp
from .seeds import derive_seed
from .weights import WeightLaw, sample_weights


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    runtime_s: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  {self.detail}".rstrip()

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail, "runtime_s": self.runtime_s}


def graph_invariant_violations(g: WeightedGraph) -> list[str]:
    """Names of violated structural invariants; empty when the graph is well formed."""
    bad = []
    n = g.n_vertices
    indptr, indices = g.indptr, g.indices
    if indptr[0] != 0 or np.any(np.diff(indptr) < 0) or indptr[-1] != indices.size:
        return ["csr-offsets"]
    if indices.size and (indices.min() < 0 or indices.max() >= n):
        return ["index-range"]
    src = np.repeat(np.arange(n), np.diff(indptr))
    if np.any(src == indices):
        bad.append("no-self-loops")
    # strictly increasing within each row
    same_row = src[1:] == src[:-1]
    if np.any(same_row & (np.diff(indices) <= 0)):
        bad.append("sorted-unique-neighbours")
    fwd = set(zip(src.tolist(), indices.tolist()))
    if any((j, i) not in fwd for i, j in fwd):
        bad.append("symmetry")
    if indices.size % 2:
        bad.append("handshake")
    if not bad:
        tri = clustering.triangle_counts(g)
        deg = g.degrees
        if np.any(2 * tri > deg * (deg - 1)):
            bad.append("triangle-bound")
    return bad


def corrupt_adjacency(g: WeightedGraph) -> WeightedGraph:
    """Test hook: drop one direction of the first edge, breaking symmetry."""
    if g.indices.size == 0:
        raise ValueError("graph has no edges to corrupt")
    row = int(np.flatnonzero(np.diff(g.indptr))[0])
    indices = np.delete(np.asarray(g.indices), g.indptr[row])
    indptr = np.asarray(g.indptr).copy()
    indptr[row + 1:] -= 1
    return WeightedGraph(g.points, g.weights, g.params, indptr, indices, g.engine, g.edge_seed, dict(g.meta))


def check_graph(g: WeightedGraph, name: str = "graph invariants") -> CheckResult:
    bad = graph_invariant_violations(g)
    return CheckResult(name, not bad, "violated: " + ", ".join(bad) if bad else f"N={g.n_vertices} E={g.n_edges}")


def brute_force_triangles(g: WeightedGraph) -> np.ndarray:
    """Triangles through each vertex by enumerating all vertex triples."""
    n = g.n_vertices
    adj = np.zeros((n, n), dtype=bool)
    i, j = g.edges()
    adj[i, j] = adj[j, i] = True
    tri = np.zeros(n, dtype=np.int64)
    for a, b, c in itertools.combinations(range(n), 3):
        if adj[a, b] and adj[b, c] and adj[a, c]:
            tri[a] += 1
            tri[b] += 1
            tri[c] += 1
    return tri


def random_model(rng: np.random.Generator, max_mean_points: float = 1500.0):
    """Random model, geometry and intensity for engine comparisons."""
    d = int(rng.integers(1, 4))
    alpha = float(rng.uniform(0.5 * d, d + 6.0))
    kind = rng.integers(0, 3)
    tau = float(rng.uniform(1.3, 4.0))
    if kind == 0:
        law = WeightLaw.pareto(tau)
    elif kind == 1:
        law = WeightLaw.constant(tau, float(rng.uniform(0.2, 5.0)))
    else:
        law = WeightLaw.log_power(tau, float(rng.uniform(-2.0, tau - 1.0)), float(rng.uniform(0.5, 2.0)))
    intensity = float(rng.uniform(0.3, 3.0))
    mean_pts = float(rng.uniform(50.0, max_mean_points))
    side = (mean_pts / intensity) ** (1.0 / d)
    topology = "torus" if rng.random() < 0.5 else "free"
    return ModelParams(d, alpha, law, intensity), BoxGeometry(d, side, topology)


def engine_equivalence(configs: int, seed: int, max_points: int = 2000,
                       max_mean_points: float = 1500.0) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.Generator(np.random.PCG64(seed))
    failures = []
    checked = 0
    largest = 0
    while checked < configs:
        params, geom = random_model(rng, max_mean_points)
        idx = checked
        ps = sample_ppp(geom, params.intensity, derive_seed(seed, "engine-points", idx))
        if len(ps) > max_points:
            continue
        wv = sample_weights(params.law, len(ps), derive_seed(seed, "engine-weights", idx))
        es = derive_seed(seed, "engine-edges", idx)
        a = build_graph_naive(ps, wv, params, es)
        b = build_graph_cell(ps, wv, params, es)
        if not a.same_edges(b):
            failures.append(f"#{idx} d={params.d} alpha={params.alpha:.3g} N={len(ps)}")
        largest = max(largest, len(ps))
        checked += 1
    detail = f"{configs} configurations, N <= {largest}" + (f"; mismatches: {failures}" if failures else "")
    return CheckResult("engine equivalence", not failures, detail, time.perf_counter() - t0)


def random_graph(rng: np.random.Generator, n_max: int = 200) -> WeightedGraph:
    params, geom = random_model(rng, max_mean_points=n_max * 0.6)
    ps = sample_ppp(geom, params.intensity, int(rng.integers(1 << 62)))
    if len(ps) > n_max:
        ps = ps.with_points(ps.points[:n_max])
    wv = sample_weights(params.law, len(ps), int(rng.integers(1 << 62)))
    return build_graph_cell(ps, wv, params, int(rng.integers(1 << 62)))


def triangle_oracle(graphs: int, seed: int) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.Generator(np.random.PCG64(seed))
    bad = []
    for k in range(graphs):
        g = random_graph(rng)
        if not np.array_equal(clustering.triangle_counts(g), brute_force_triangles(g)):
            bad.append(k)
    return CheckResult("triangle counts vs brute force", not bad,
                       f"{graphs} graphs" + (f"; mismatches {bad}" if bad else ""), time.perf_counter() - t0)


def component_oracle(graphs: int, seed: int) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.Generator(np.random.PCG64(seed))
    bad = []
    for k in range(graphs):
        g = random_graph(rng)
        if not np.array_equal(components.connected_components(g), components.flood_fill_labels(g)):
            bad.append(k)
    return CheckResult("components vs flood fill", not bad,
                       f"{graphs} graphs" + (f"; mismatches {bad}" if bad else ""), time.perf_counter() - t0)


def c0_cross_check() -> CheckResult:
    t0 = time.perf_counter()
    worst = 0.0
    for d, alpha, tau in ((1, 2.0, 3.0), (2, 4.0, 2.5), (3, 5.0, 2.2)):
        p = ModelParams(d, alpha, WeightLaw.pareto(tau))
        worst = max(worst, abs(theory.c0_quadrature(p) / theory.c0(p) - 1.0))
    return CheckResult("c0 closed form vs quadrature", worst <= 1e-8, f"max relative gap {worst:.2e}",
                       time.perf_counter() - t0)


def seed_determinism(seed: int) -> CheckResult:
    t0 = time.perf_counter()
    params = ModelParams(2, 4.0, WeightLaw.pareto(2.5))
    geom = BoxGeometry(2, 24.0)
    graphs = []
    for _ in range(2):
        ps = sample_ppp(geom, 1.0, derive_seed(seed, "det-points"))
        wv = sample_weights(params.law, len(ps), derive_seed(seed, "det-weights"))
        graphs.append(build_graph_cell(ps, wv, params, derive_seed(seed, "det-edges")))
    ok = graphs[0].same_edges(graphs[1]) and np.array_equal(graphs[0].points.points, graphs[1].points.points)
    return CheckResult("seed determinism", ok, "", time.perf_counter() - t0)


def invariants_on_samples(seed: int, count: int = 5) -> list[CheckResult]:
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    for k in range(count):
        g = random_graph(rng, n_max=1000)
        out.append(check_graph(g, f"graph invariants #{k}"))
    return out


def fast_suite(seed: int = 0, corrupt: bool = False) -> list[CheckResult]:
    """Quick structural and numerical self-checks."""
    results = [
        engine_equivalence(10, derive_seed(seed, "fast-engine"), max_points=800, max_mean_points=600.0),
        triangle_oracle(5, derive_seed(seed, "fast-triangles")),
        component_oracle(5, derive_seed(seed, "fast-components")),
        c0_cross_check(),
        seed_determinism(seed),
    ]
    results += invariants_on_samples(derive_seed(seed, "fast-invariants"))
    if corrupt:
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "fast-corrupt")))
        g = random_graph(rng, n_max=300)
        while g.n_edges == 0:
            g = random_graph(rng, n_max=300)
        results.append(check_graph(corrupt_adjacency(g), "graph invariants (corrupted adjacency)"))
    return results


def all_passed(results) -> bool:
    return all(r.passed for r in results)


def format_table(results) -> str:
    width = max((len(r.name) for r in results), default=4)
    lines = [f"{'status':6}  {'check':{width}}  detail"]
    for r in results:
        lines.append(f"{'PASS' if r.passed else 'FAIL':6}  {r.name:{width}}  {r.detail}")
    return "\n".join(lines)
