"""Reference values: Campbell constants, boxed Campbell integrals, regimes.

Infinite-volume integrals over R^d are reduced to radial integrals,
integrated numerically up to a radius beyond which an analytic bound
``psi(theta) <= E[W^s] theta^s`` (any ``s`` in [0, 1]) controls the
remainder.  Boxed integrals use the exact surface measure of a sphere
inside the cube.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DivergenceError, InvalidParameterError
from .graphgen import ModelParams
from .pointprocess import BoxGeometry
from .weights import WeightLaw, fractional_moment, psi

_QUAD = dict(limit=500, epsabs=0.0, epsrel=1e-12)


class Regime(str, enum.Enum):
    INFINITE_DEGREE_A = "infinite_degree_a"  # alpha <= d
    INFINITE_DEGREE_B = "infinite_degree_b"  # gamma <= 1
    POWER_LAW = "power_law"


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    gamma: float

    @property
    def finite_degree(self) -> bool:
        return self.regime is Regime.POWER_LAW

    def to_dict(self) -> dict:
        return {"regime": self.regime.value, "gamma": self.gamma}


def classify_regime(params: ModelParams) -> RegimeReport:
    gamma = params.gamma
    if params.alpha <= params.d:
        regime = Regime.INFINITE_DEGREE_A
    elif gamma <= 1:
        regime = Regime.INFINITE_DEGREE_B
    else:
        regime = Regime.POWER_LAW
    return RegimeReport(regime, gamma)


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _require_finite_degree(params: ModelParams):
    report = classify_regime(params)
    if not report.finite_degree:
        raise DivergenceError(
            f"Campbell integrals diverge in regime {report.regime.value} "
            f"(d={params.d}, alpha={params.alpha}, gamma={report.gamma})"
        )


def c0(params: ModelParams) -> float:
    """``v_d Gamma(1 - d/alpha) E[W^(d/alpha)]``."""
    _require_finite_degree(params)
    d, a = params.d, params.alpha
    return unit_ball_volume(d) * math.gamma(1 - d / a) * fractional_moment(params.law, d / a)


def _bound_exponent(params: ModelParams) -> float:
    # s in (d/alpha, min(1, tau-1)) with E[W^s] finite
    law = params.law
    if law.kind == "deterministic" or law.tau - 1 > 1:
        return 1.0
    return 0.5 * (params.d / params.alpha + (law.tau - 1))


def _tail_radius(params: ModelParams, w: float, power: int, tol: float) -> float:
    """Radius beyond which the radial remainder of ``int psi(w r^-alpha)^power`` is below ``tol``."""
    d, a = params.d, params.alpha
    s = _bound_exponent(params)
    ms = fractional_moment(params.law, s) ** power
    expo = power * s * a - d
    coef = d * unit_ball_volume(d) * ms * w ** (power * s) / expo
    return max((tol / coef) ** (-1.0 / expo), 2.0 * w ** (1.0 / a))


def tail_remainder_bound(params: ModelParams, w: float, power: int, radius: float) -> float:
    """Analytic bound on ``int_{|x| > radius} psi(w |x|^-alpha)^power dx``."""
    d, a = params.d, params.alpha
    s = _bound_exponent(params)
    expo = power * s * a - d
    return d * unit_ball_volume(d) * fractional_moment(params.law, s) ** power * w ** (power * s) * radius ** (-expo) / expo


def _radial(params: ModelParams, w: float, power: int, radius: float) -> float:
    """``int_{|x| <= radius} psi(w |x|^-alpha)^power dx``."""
    d, a, law = params.d, params.alpha, params.law
    surf = d * unit_ball_volume(d)
    rc = w ** (1.0 / a)

    def f_r(r):
        if r == 0.0:
            return 0.0 if d > 1 else surf
        return surf * r ** (d - 1) * psi(law, w * r ** (-a)) ** power

    def f_t(t):
        r = math.exp(t)
        return surf * r ** d * psi(law, w * r ** (-a)) ** power

    head_end = min(rc, radius)
    total, _ = integrate.quad(f_r, 0.0, head_end, **_QUAD)
    if radius > rc:
        lo = math.log(rc)
        hi = math.log(radius)
        edges = np.linspace(lo, hi, max(2, int(math.ceil(hi - lo)) + 1))
        for t0, t1 in zip(edges[:-1], edges[1:]):
            part, _ = integrate.quad(f_t, t0, t1, **_QUAD)
            total += part
    return total


def c0_quadrature(params: ModelParams, tol: float = 1e-11) -> float:
    """``int psi(|y|^-alpha) dy`` computed directly; equals :func:`c0`."""
    _require_finite_degree(params)
    radius = _tail_radius(params, 1.0, 1, tol)
    return _radial(params, 1.0, 1, radius)


def c1(params: ModelParams, tol: float = 1e-10) -> float:
    """``int psi(|y|^-alpha)^2 dy``: the annealed variance of Z_w is ``lambda c1 w^(d/alpha)``."""
    _require_finite_degree(params)
    radius = _tail_radius(params, 1.0, 2, tol)
    return _radial(params, 1.0, 2, radius)


@dataclass(frozen=True)
class CampbellConstants:
    c0: float
    c1: float
    v_d: float


def campbell_constants(params: ModelParams) -> CampbellConstants:
    return CampbellConstants(c0(params), c1(params), unit_ball_volume(params.d))


# ---------------------------------------------------------------------------
# boxed integrals


def _circle_angle_in_square(rho: float, h: float) -> float:
    """Angular measure of the circle of radius ``rho`` inside ``[-h, h]^2``."""
    if rho <= h:
        return 2.0 * math.pi
    if rho >= math.sqrt(2.0) * h:
        return 0.0
    return 8.0 * (math.pi / 4.0 - math.acos(h / rho))


def shell_measure(d: int, r: float, h: float) -> float:
    """Surface measure of ``{|x| = r}`` inside the cube ``[-h, h]^d`` (d <= 3)."""
    if r < 0 or r > math.sqrt(d) * h:
        return 0.0
    if d == 1:
        return 2.0 if r <= h else 0.0
    if d == 2:
        return r * _circle_angle_in_square(r, h)
    if d == 3:
        if r <= h:
            return 4.0 * math.pi * r * r
        # sphere area is uniform in the height coordinate
        zmax = min(r, h)
        zmin = math.sqrt(max(r * r - 2.0 * h * h, 0.0))
        brk = [p for p in (math.sqrt(max(r * r - h * h, 0.0)),) if zmin < p < zmax]
        val, _ = integrate.quad(lambda z: _circle_angle_in_square(math.sqrt(max(r * r - z * z, 0.0)), h),
                                zmin, zmax, points=brk or None, limit=200, epsabs=1e-13, epsrel=1e-12)
        return 2.0 * r * val
    raise NotImplementedError("boxed integrals are implemented for d <= 3")


def _boxed(params: ModelParams, geometry: BoxGeometry, w: float, power: int) -> float:
    if geometry.dim != params.d:
        raise InvalidParameterError("geometry and model dimensions differ")
    if w < 0:
        raise InvalidParameterError("weight must be non-negative")
    if w == 0:
        return 0.0
    d, a, law = params.d, params.alpha, params.law
    h = geometry.side / 2.0
    rc = w ** (1.0 / a)

    def f(r):
        if r == 0.0:
            return shell_measure(d, 0.0, h)
        return shell_measure(d, r, h) * psi(law, w * r ** (-a)) ** power

    pts = sorted({p for p in (rc, h, math.sqrt(2.0) * h) if 0 < p < math.sqrt(d) * h})
    edges = [0.0] + pts + [math.sqrt(d) * h]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo:
            part, _ = integrate.quad(f, lo, hi, limit=500, epsabs=0.0, epsrel=1e-10)
            total += part
    return params.intensity * total


def annealed_mean_degree(params: ModelParams, geometry: BoxGeometry, w: float) -> float:
    """``E[Z_w]`` for a vertex of weight ``w`` at the centre of the box.

    With the vertex at the centre the minimum-image distance equals the
    Euclidean one, so torus and free boundary give the same value.
    """
    return _boxed(params, geometry, w, 1)


def annealed_variance_degree(params: ModelParams, geometry: BoxGeometry, w: float) -> float:
    """``Var(Z_w)`` over the point process, in the box."""
    return _boxed(params, geometry, w, 2)


def infinite_volume_mean_degree(params: ModelParams, w: float) -> float:
    return params.intensity * c0(params) * w ** (params.d / params.alpha)


def infinite_volume_variance_degree(params: ModelParams, w: float) -> float:
    return params.intensity * c1(params) * w ** (params.d / params.alpha)


def rescaled_intensity(intensity: float, edge_prefactor: float, d: int, alpha: float) -> float:
    """Point intensity equivalent to a kernel ``1 - exp(-s w w' r^-alpha)`` at unit prefactor."""
    return intensity * edge_prefactor ** (d / alpha)


# ---------------------------------------------------------------------------
# Campbell identities for radial step functions


@dataclass(frozen=True)
class RadialStep:
    """``f(x) = values[k]`` for ``radii[k-1] < |x| <= radii[k]`` (``radii[-1] = 0``), else 0."""

    d: int
    radii: tuple
    values: tuple

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.shape != v.shape or r.ndim != 1 or r.size == 0:
            raise InvalidParameterError("radii and values must be matching non-empty sequences")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
            raise InvalidParameterError("step function must be bounded with compact support")
        if r[0] <= 0 or np.any(np.diff(r) <= 0):
            raise InvalidParameterError("radii must be positive and increasing")
        object.__setattr__(self, "radii", tuple(float(x) for x in r))
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    def shell_volumes(self) -> np.ndarray:
        r = np.asarray(self.radii)
        vol = unit_ball_volume(self.d) * r ** self.d
        return np.diff(np.concatenate([[0.0], vol]))

    def __call__(self, dist):
        dist = np.asarray(dist, dtype=float)
        idx = np.searchsorted(np.asarray(self.radii), dist, side="left")
        vals = np.concatenate([self.values, [0.0]])
        return vals[idx]


@dataclass(frozen=True)
class CampbellMoments:
    mean: float
    variance: float
    log_mgf: float


def campbell_check(f: RadialStep, intensity: float, theta: float) -> CampbellMoments:
    """Mean, variance and log-MGF of ``S = sum_x f(x)`` over a PPP, in closed form."""
    vol = f.shell_volumes()
    v = np.asarray(f.values)
    return CampbellMoments(
        float(intensity * np.sum(v * vol)),
        float(intensity * np.sum(v * v * vol)),
        float(intensity * np.sum(np.expm1(theta * v) * vol)),
    )
