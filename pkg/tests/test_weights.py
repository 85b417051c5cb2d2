import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from oracles import moment_oracle, psi_oracle
from sfperc.errors import InvalidParameterError
from sfperc.weights import WeightLaw, cdf, fractional_moment, psi, quantile, sample_weights, tail


def test_law_validation():
    with pytest.raises(InvalidParameterError):
        WeightLaw.pareto(1.0)
    with pytest.raises(InvalidParameterError):
        WeightLaw.pareto(0.5)
    with pytest.raises(InvalidParameterError):
        WeightLaw.constant(2.5, 0.0)
    with pytest.raises(InvalidParameterError):
        WeightLaw.log_power(2.5, 2.0)
    with pytest.raises(InvalidParameterError):
        WeightLaw("lognormal", tau=2.0)


def test_inversion_examples():
    assert quantile(WeightLaw.pareto(2.0), 0.25) == pytest.approx(4.0)
    assert quantile(WeightLaw.pareto(3.0), 0.25) == pytest.approx(2.0)


def test_tail_examples():
    assert tail(WeightLaw.pareto(3.0), 10.0) == pytest.approx(0.01)
    assert tail(WeightLaw.pareto(2.0), 0.5) == 1.0
    law = WeightLaw.log_power(2.0, 1.0)
    assert tail(law, 1e6) == pytest.approx(1e-6 * math.log(math.e + 1e6))
    ratios = [2 * tail(law, 2 * w) / tail(law, w) for w in (1e2, 1e4, 1e8, 1e12)]
    assert all(abs(b - 1) < abs(a - 1) for a, b in zip(ratios, ratios[1:]))
    assert abs(ratios[-1] - 1) < 0.03


@pytest.mark.parametrize("law", [WeightLaw.pareto(2.5), WeightLaw.constant(3.0, 4.0),
                                 WeightLaw.log_power(2.2, 1.0, 1.5), WeightLaw.log_power(3.0, -2.0)])
def test_tail_continuous_and_decreasing(law):
    w = np.concatenate([np.linspace(0.01, law.w0, 50), np.geomspace(law.w0, 1e8, 400)])
    t = tail(law, w)
    assert np.all(np.diff(t) <= 1e-15)
    assert tail(law, law.w0) == pytest.approx(1.0, rel=1e-12)
    assert tail(law, 1e12) < 1e-6
    assert np.allclose(cdf(law, w), 1 - t)


@pytest.mark.parametrize("law", [WeightLaw.pareto(3.0), WeightLaw.log_power(2.5, 1.0, 2.0), WeightLaw.constant(2.5, 0.3)])
def test_quantile_inverts_tail(law):
    u = np.geomspace(1e-12, 1.0, 200)
    assert np.allclose(tail(law, quantile(law, u)), u, rtol=1e-10)


def test_sampling_rejects():
    with pytest.raises(InvalidParameterError):
        sample_weights(WeightLaw.deterministic(1.0), 3, 0)
    with pytest.raises(InvalidParameterError):
        sample_weights(WeightLaw.pareto(2.0), -1, 0)
    assert len(sample_weights(WeightLaw.pareto(2.0), 0, 0)) == 0


def test_sample_regeneration_and_support():
    law = WeightLaw.log_power(2.5, 1.0, 3.0)
    a = sample_weights(law, 1000, 5)
    assert a == sample_weights(law, 1000, 5)
    assert np.all(a.values >= law.w0 * (1 - 1e-12))


def test_pareto_mean_million_draws():
    w = sample_weights(WeightLaw.pareto(2.5), 10 ** 6, 2024).values
    # infinite variance: use a robust 3-SE band from the truncated second moment
    se = w.std(ddof=1) / math.sqrt(w.size)
    assert abs(w.mean() - 3.0) <= 3 * se


@pytest.mark.parametrize("law", [WeightLaw.pareto(2.5), WeightLaw.log_power(3.0, 1.5, 0.7)])
def test_kolmogorov_smirnov(law):
    w = sample_weights(law, 10 ** 5, 77).values
    d, _ = stats.kstest(w, lambda x: cdf(law, x))
    # asymptotic critical value at level 1e-3
    assert d < 1.949 / math.sqrt(w.size)


def test_fractional_moment_examples():
    assert fractional_moment(WeightLaw.pareto(2.5), 0.5) == pytest.approx(1.5, rel=1e-8)
    assert fractional_moment(WeightLaw.pareto(3.0), 1.0) == pytest.approx(2.0, rel=1e-8)
    assert fractional_moment(WeightLaw.log_power(2.5, 1.0), 0.0) == 1.0
    assert fractional_moment(WeightLaw.pareto(2.5), 1.5) == math.inf
    assert fractional_moment(WeightLaw.pareto(2.5), 2.0) == math.inf
    assert fractional_moment(WeightLaw.log_power(2.5, 1.0), 1.5) == math.inf


@pytest.mark.parametrize("tau,a,c,s", [(2.5, 1.0, 2.0, 0.5), (3.0, -1.0, 1.0, 1.2), (2.2, 0.5, 0.5, 0.9),
                                       (2.5, 0.0, 3.0, 0.7)])
def test_fractional_moment_vs_oracle(tau, a, c, s):
    law = WeightLaw.log_power(tau, a, c) if a else WeightLaw.constant(tau, c)
    assert fractional_moment(law, s) == pytest.approx(moment_oracle("slowly_varying", tau, s, c=c, a=a), rel=1e-8)


def test_fractional_moment_monotone_log_convex():
    law = WeightLaw.log_power(3.0, 1.0)
    s = np.linspace(0.0, 1.8, 19)
    logm = np.log([fractional_moment(law, x) for x in s])
    assert np.all(np.diff(logm) >= 0)
    assert np.all(np.diff(logm, 2) >= -1e-10)


def test_psi_examples():
    law = WeightLaw.pareto(2.0)
    assert psi(law, 0.0) == 0.0
    assert psi(law, 1e12) == pytest.approx(1.0, abs=1e-10)
    v = psi(law, 1.0)
    assert 1 - math.exp(-1) < v < 1
    assert v == pytest.approx(psi_oracle("pareto", 2.0, 1.0), abs=1e-10)
    with pytest.raises(InvalidParameterError):
        psi(law, -1.0)


def test_psi_brute_force_halving():
    # int_1^inf (1 - e^-w) w^-2 dw: trapezoid halving on a log grid with Richardson extrapolation
    def trap(k):
        t = np.linspace(0.0, 40.0, 2 ** k + 1)
        w = np.exp(t)
        return np.trapezoid((1 - np.exp(-w)) / w, t)  # w^-2 dw = w^-1 dt

    prev = None
    for k in range(8, 20):
        cur = (4 * trap(k + 1) - trap(k)) / 3
        if prev is not None and abs(cur - prev) < 1e-13:
            break
        prev = cur
    assert psi(WeightLaw.pareto(2.0), 1.0) == pytest.approx(cur, abs=1e-10)


@pytest.mark.parametrize("kind,tau,c,a", [("pareto", 3.0, 1.0, 0.0), ("pareto", 1.5, 1.0, 0.0),
                                          ("slowly_varying", 2.5, 2.0, 1.0), ("slowly_varying", 2.0, 0.5, -1.0)])
@pytest.mark.parametrize("theta", [1e-6, 1e-3, 0.1, 1.0, 7.0, 300.0])
def test_psi_vs_oracle(kind, tau, c, a, theta):
    law = WeightLaw.pareto(tau) if kind == "pareto" else WeightLaw.log_power(tau, a, c)
    assert psi(law, theta) == pytest.approx(psi_oracle(kind, tau, theta, c=c, a=a), abs=1e-10, rel=1e-9)


@given(st.floats(2.05, 5.0), st.floats(0.0, 50.0), st.floats(0.0, 50.0))
def test_psi_bounds_monotone_concave(tau, t1, t2):
    law = WeightLaw.pareto(tau)
    lo, hi = sorted((t1, t2))
    a, b, m = psi(law, lo), psi(law, hi), psi(law, 0.5 * (lo + hi))
    mean = fractional_moment(law, 1.0)
    assert 0.0 <= a <= b <= 1.0
    assert a <= min(lo * mean, 1.0) + 1e-12
    assert m >= 0.5 * (a + b) - 1e-12
