"""Acceptance criteria: one function per criterion, each returning check results.

Every random quantity is drawn from seeds derived from ``MASTER_SEED``, fixed
before any criterion was evaluated.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import theory, validation
from .estimators import (
    TruncationParams,
    averaged_cc,
    hill_gamma,
    palm_cc_estimate,
    quenched_conditional_degree,
    slivnyak_mecke_check,
    truncated_cc,
    truncated_degrees,
    truncation_masks,
)
from .estimators.oracles import campbell_monte_carlo
from .graphgen import ModelParams, build_graph_cell
from .pointprocess import BoxGeometry, sample_ppp
from .seeds import derive_seed
from .theory import RadialStep
from .validation import CheckResult
from .weights import WeightLaw, sample_weights

MASTER_SEED = 0

# envelope constants from envelope_pilot(); frozen so fresh runs cannot refit them
ENVELOPE_C1 = 3.740234375
ENVELOPE_C2 = 0.7173437500000001
PILOT_SEEDS = 20


def _seed(stage: str, index: int = 0) -> int:
    return derive_seed(MASTER_SEED, stage, index)


def _timed(name: str, passed: bool, detail: str, t0: float, limit_s: float) -> CheckResult:
    elapsed = time.perf_counter() - t0
    return CheckResult(name, bool(passed), f"{detail} [{elapsed:.1f}s, limit {limit_s:.0f}s]", elapsed)


def _runtime_check(name: str, t0: float, limit_s: float) -> CheckResult:
    elapsed = time.perf_counter() - t0
    return CheckResult(f"{name} runtime", elapsed < limit_s, f"{elapsed:.1f}s < {limit_s:.0f}s", elapsed)


def _sample(geom: BoxGeometry, params: ModelParams, stage: str, index: int):
    ps = sample_ppp(geom, params.intensity, _seed(stage + "-points", index))
    wv = sample_weights(params.law, len(ps), _seed(stage + "-weights", index))
    return ps, wv


def _graph(geom: BoxGeometry, params: ModelParams, stage: str, index: int):
    ps, wv = _sample(geom, params, stage, index)
    return build_graph_cell(ps, wv, params, _seed(stage + "-edges", index))


# ---------------------------------------------------------------------------


def criterion_1() -> list[CheckResult]:
    t0 = time.perf_counter()
    res = validation.engine_equivalence(50, _seed("c1-engine"), max_points=2000)
    return [CheckResult("C1 engine equivalence", res.passed, res.detail, res.runtime_s),
            _runtime_check("C1", t0, 120)]


CAMPBELL_PARAMS = ModelParams(1, 2.0, WeightLaw.pareto(3.0))
CAMPBELL_GEOMETRY = BoxGeometry(1, 100.0)
CAMPBELL_W = 10.0
CAMPBELL_REFERENCE = 14.950


def _z_samples(count: int, stage: str) -> np.ndarray:
    law = CAMPBELL_PARAMS.law
    return np.array([
        quenched_conditional_degree(sample_ppp(CAMPBELL_GEOMETRY, 1.0, _seed(stage, s)), law,
                                    CAMPBELL_PARAMS.alpha, CAMPBELL_W)
        for s in range(count)
    ])


def criterion_2() -> list[CheckResult]:
    t0 = time.perf_counter()
    z = _z_samples(200, "c2-points")
    mean = float(np.mean(z))
    se = float(np.std(z, ddof=1) / math.sqrt(z.size))
    boxed = theory.annealed_mean_degree(CAMPBELL_PARAMS, CAMPBELL_GEOMETRY, CAMPBELL_W)
    a = _timed("C2a mean Z_w vs boxed Campbell mean", abs(mean - boxed) <= 3 * se,
               f"mean {mean:.4f} +- {se:.4f}, boxed {boxed:.4f}, |z| = {abs(mean - boxed) / se:.2f} <= 3", t0, 120)
    rel = abs(boxed / CAMPBELL_REFERENCE - 1.0)
    limit = theory.infinite_volume_mean_degree(CAMPBELL_PARAMS, CAMPBELL_W)
    b = CheckResult("C2b boxed mean within 1% of 14.950", rel <= 0.01,
                    f"boxed {boxed:.4f} is {100 * rel:.2f}% off; infinite-volume lambda c0 w^(1/2) = {limit:.4f}")
    return [a, b, _runtime_check("C2", t0, 120)]


def _variance_se(x: np.ndarray) -> tuple[float, float]:
    n = x.size
    var = float(np.var(x, ddof=1))
    m4 = float(np.mean((x - x.mean()) ** 4))
    return var, math.sqrt(max(m4 - var * var, 0.0) / n)


def criterion_3() -> list[CheckResult]:
    t0 = time.perf_counter()
    z = _z_samples(500, "c3-points")
    var, se = _variance_se(z)
    boxed = theory.annealed_variance_degree(CAMPBELL_PARAMS, CAMPBELL_GEOMETRY, CAMPBELL_W)
    a = _timed("C3a variance Z_w vs boxed quadrature", abs(var - boxed) <= 4 * se,
               f"var {var:.4f} +- {se:.4f}, boxed {boxed:.4f}, |z| = {abs(var - boxed) / se:.2f} <= 4", t0, 300)
    c0, c1 = theory.c0(CAMPBELL_PARAMS), theory.c1(CAMPBELL_PARAMS)
    b = CheckResult("C3b c1 <= c0", c1 <= c0, f"c1 = {c1:.6f}, c0 = {c0:.6f}")
    return [a, b, _runtime_check("C3", t0, 300)]


def criterion_4() -> list[CheckResult]:
    t0 = time.perf_counter()
    geom = BoxGeometry(2, 200.0)
    out = []
    for tau, lo, hi, tag in ((2.5, 2.6, 3.4, "C4a"), (3.5, 4.2, 5.8, "C4b")):
        params = ModelParams(2, 4.0, WeightLaw.pareto(tau))
        est = []
        for s in range(5):
            g = _graph(geom, params, f"c4-tau{tau}", s)
            est.append(hill_gamma(g.degrees).gamma_hat)
        hits = sum(lo <= e <= hi for e in est)
        out.append(CheckResult(f"{tag} Hill gamma (tau={tau}, gamma={params.gamma:g}) in [{lo}, {hi}] on >= 4/5 seeds",
                               hits >= 4, f"{hits}/5 hits; estimates " + ", ".join(f"{e:.3f}" for e in est)))
    return out + [_runtime_check("C4", t0, 600)]


def criterion_5() -> list[CheckResult]:
    t0 = time.perf_counter()
    out = []
    cases = (
        (ModelParams(2, 1.5, WeightLaw.pareto(2.5)), theory.Regime.INFINITE_DEGREE_A),
        (ModelParams(2, 4.0, WeightLaw.pareto(1.4)), theory.Regime.INFINITE_DEGREE_B),
        (ModelParams(2, 4.0, WeightLaw.pareto(2.5)), theory.Regime.POWER_LAW),
    )
    for p, expected in cases:
        rep = theory.classify_regime(p)
        ok = rep.regime is expected and (expected is not theory.Regime.POWER_LAW or math.isclose(rep.gamma, 3.0))
        out.append(CheckResult(f"C5 classify d={p.d} alpha={p.alpha:g} tau={p.tau:g}", ok,
                               f"{rep.regime.value}, gamma = {rep.gamma:g}"))
    params = ModelParams(2, 1.5, WeightLaw.pareto(2.5))
    geom = BoxGeometry(2, 72.0)
    radii = (8.0, 16.0, 32.0)
    counts = []
    for s in range(50):
        ps, wv = _sample(geom, params, "c5", s)
        w0 = float(sample_weights(params.law, 1, _seed("c5-origin-weight", s)).values[0])
        counts.append(truncated_degrees(ps, wv, params, _seed("c5-edges", s), w0, radii))
    counts = np.asarray(counts, dtype=float)
    for k, R in enumerate(radii[:2]):
        ratio = float(np.mean(counts[:, k + 1] / counts[:, k]))
        out.append(CheckResult(f"C5 mean D0({2 * R:g})/D0({R:g}) > 1.3", ratio > 1.3, f"{ratio:.3f} over 50 seeds"))
    return out + [_runtime_check("C5", t0, 300)]


CC_PARAMS = ModelParams(2, 4.0, WeightLaw.pareto(2.5))


def criterion_6() -> list[CheckResult]:
    t0 = time.perf_counter()
    palm = palm_cc_estimate(CC_PARAMS, BoxGeometry(2, 64.0), 500, _seed("c6-palm"), level=0.99)
    out = [CheckResult("C6a Palm 99% CI above 0", palm.ci_low > 0,
                       f"estimate {palm.estimate:.4f}, CI [{palm.ci_low:.4f}, {palm.ci_high:.4f}]")]
    sds, means = [], {}
    for n in (32, 64, 128):
        vals = np.array([averaged_cc(_graph(BoxGeometry(2, float(n)), CC_PARAMS, f"c6-n{n}", s)) for s in range(30)])
        sds.append(float(np.std(vals, ddof=1)))
        means[n] = vals
    dec = sds[0] > sds[1] > sds[2]
    out.append(CheckResult("C6b SD of CC_n strictly decreasing in n = 32, 64, 128", dec,
                           "SD " + ", ".join(f"{v:.5f}" for v in sds)))
    v = means[128]
    m128, se128 = float(np.mean(v)), float(np.std(v, ddof=1) / math.sqrt(v.size))
    comb = math.hypot(se128, palm.stderr)
    gap = abs(m128 - palm.estimate)
    out.append(CheckResult("C6c |mean CC_128 - Palm| <= 3 combined SE", gap <= 3 * comb,
                           f"mean CC_128 {m128:.4f}, Palm {palm.estimate:.4f}, gap {gap / comb:.2f} SE"))
    return out + [_runtime_check("C6", t0, 1200)]


ENVELOPE_GEOMETRY = BoxGeometry(2, 128.0, "free")


def truncation_terms(g, trunc: TruncationParams) -> tuple[float, float]:
    """Pathwise bound terms: (count deviation + frame vertices) and vertices with edges leaving their box.

    Both are normalised by ``lambda n^d``; their sum bounds ``|CC_n - CC_trunc|``.
    """
    vol = g.points.intensity * g.points.geometry.volume
    masks = truncation_masks(g, trunc)
    frame = abs(1.0 - g.n_vertices / vol) + np.count_nonzero(masks.frame) / vol
    leaving = np.count_nonzero(masks.leaves & ~masks.frame) / vol
    return frame, leaving


def envelope_pilot(seeds: int = PILOT_SEEDS, m: float = 16.0, delta: float = 0.1) -> tuple[float, float]:
    """Fit ``c1, c2`` as the largest pilot ratios of the two bound terms to ``delta`` and ``(delta m)^(d - alpha)``."""
    trunc = TruncationParams(m, delta)
    d, alpha = CC_PARAMS.d, CC_PARAMS.alpha
    c1 = c2 = 0.0
    for s in range(seeds):
        frame, leaving = truncation_terms(_graph(ENVELOPE_GEOMETRY, CC_PARAMS, "c7-pilot", s), trunc)
        c1 = max(c1, frame / delta)
        c2 = max(c2, leaving / (delta * m) ** (d - alpha))
    return c1, c2


def envelope(m: float, delta: float, c1: float = ENVELOPE_C1, c2: float = ENVELOPE_C2) -> float:
    return c1 * delta + c2 * (delta * m) ** (CC_PARAMS.d - CC_PARAMS.alpha)


def criterion_7() -> list[CheckResult]:
    t0 = time.perf_counter()
    configs = (TruncationParams(16.0, 0.2), TruncationParams(32.0, 0.1))
    gaps = [[] for _ in configs]
    for s in range(50):
        g = _graph(ENVELOPE_GEOMETRY, CC_PARAMS, "c7-fresh", s)
        cc = averaged_cc(g)
        for k, tr in enumerate(configs):
            gaps[k].append(abs(cc - truncated_cc(g, tr)))
    out = []
    for tr, gap in zip(configs, gaps):
        env = envelope(tr.m, tr.delta)
        out.append(CheckResult(f"C7 envelope dominates at m={tr.m:g}, delta={tr.delta:g}", max(gap) <= env,
                               f"max gap {max(gap):.4f} <= envelope {env:.4f} (c1 = {ENVELOPE_C1:.4f}, "
                               f"c2 = {ENVELOPE_C2:.4f})"))
    return out + [_runtime_check("C7", t0, 900)]


STEP_FUNCTIONS = (
    (RadialStep(2, (1.0,), (1.0,)), 0.5),
    (RadialStep(3, (0.5, 1.0, 1.5), (2.0, 1.0, 0.5)), 0.25),
)


def criterion_8() -> list[CheckResult]:
    t0 = time.perf_counter()
    out = []
    for k, (f, theta) in enumerate(STEP_FUNCTIONS):
        exact = theory.campbell_check(f, 1.0, theta)
        mc = campbell_monte_carlo(f, 1.0, theta, 10_000, _seed("c8-campbell", k))
        for label, est, se, ref in (
            ("mean", mc.mean, mc.mean_se, exact.mean),
            ("variance", mc.variance, mc.variance_se, exact.variance),
            ("log-MGF", mc.log_mgf, mc.log_mgf_se, exact.log_mgf),
        ):
            out.append(CheckResult(f"C8 Campbell f{k + 1} {label}", abs(est - ref) <= 4 * se,
                                   f"MC {est:.4f} +- {se:.4f}, exact {ref:.4f}"))
    seeds = [_seed("c8-slivnyak", s) for s in range(200)]
    rep = slivnyak_mecke_check(BoxGeometry(2, 100.0), 1.0, 1.0, seeds)
    out.append(CheckResult("C8 Slivnyak-Mecke isolated points", abs(rep.z) <= 3 and abs(rep.analytic - 432.1) < 0.05,
                           f"empirical {rep.empirical:.2f} +- {rep.stderr:.2f}, analytic {rep.analytic:.2f}"))
    return out + [_runtime_check("C8", t0, 180)]


def criterion_9() -> list[CheckResult]:
    t0 = time.perf_counter()
    tri = validation.triangle_oracle(20, _seed("c9-triangles"))
    comp = validation.component_oracle(20, _seed("c9-components"))
    return [CheckResult("C9 " + tri.name, tri.passed, tri.detail), CheckResult("C9 " + comp.name, comp.passed, comp.detail),
            _runtime_check("C9", t0, 60)]


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9,
}


def run_all(which=None) -> list[CheckResult]:
    results = []
    for k in sorted(CRITERIA if which is None else which):
        results.extend(CRITERIA[k]())
    return results
