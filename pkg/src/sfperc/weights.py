"""Weight laws with regularly varying tails.

Every law is represented through its tail quantile ``Q(u) = inf{w : P(W > w) <= u}``,
so sampling is inversion and every expectation ``E[g(W)]`` is the finite
integral of ``g(Q(u))`` over ``u`` in (0, 1].  The integrand transform
``psi(theta) = E[1 - exp(-theta W)]`` is computed by adaptive Gauss-Kronrod
quadrature in that variable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy import integrate

from .errors import InvalidParameterError

PARETO = 0
SLOWLY_VARYING = 1
DETERMINISTIC = 2

_KIND_NAMES = {PARETO: "pareto", SLOWLY_VARYING: "slowly_varying", DETERMINISTIC: "deterministic"}


@dataclass(frozen=True)
class WeightLaw:
    """Weight distribution.

    ``pareto``: ``P(W > w) = w^-(tau-1)`` on ``[1, inf)``.

    ``slowly_varying``: ``P(W > w) = c w^-(tau-1) log(e + w)^a`` for
    ``w >= w0`` and 1 below, with ``w0`` the point where the formula equals 1.
    ``a = 0`` is the constant slowly varying factor ``c``; ``a != 0`` the
    log-power factor.  Requires ``a <= tau - 1`` so that the tail is strictly
    decreasing on the whole line.

    ``deterministic``: ``W == value``.  Only used by the reference integrals;
    it cannot be sampled.
    """

    kind: str
    tau: float = math.inf
    c: float = 1.0
    a: float = 0.0
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("pareto", "slowly_varying", "deterministic"):
            raise InvalidParameterError(f"unknown weight law {self.kind!r}")
        if self.kind == "deterministic":
            if not self.value > 0:
                raise InvalidParameterError("deterministic weight must be positive")
            return
        if not (self.tau > 1 and math.isfinite(self.tau)):
            raise InvalidParameterError(f"tau must be finite and > 1, got {self.tau}")
        if self.kind == "pareto" and (self.c != 1.0 or self.a != 0.0):
            raise InvalidParameterError("pareto law takes no slowly varying factor")
        if not self.c > 0:
            raise InvalidParameterError("slowly varying constant must be positive")
        if self.a > self.tau - 1:
            raise InvalidParameterError("log-power exponent must satisfy a <= tau - 1")

    @classmethod
    def pareto(cls, tau: float) -> "WeightLaw":
        return cls("pareto", tau=float(tau))

    @classmethod
    def constant(cls, tau: float, c: float) -> "WeightLaw":
        return cls("slowly_varying", tau=float(tau), c=float(c), a=0.0)

    @classmethod
    def log_power(cls, tau: float, a: float, c: float = 1.0) -> "WeightLaw":
        return cls("slowly_varying", tau=float(tau), c=float(c), a=float(a))

    @classmethod
    def deterministic(cls, value: float = 1.0) -> "WeightLaw":
        return cls("deterministic", value=float(value))

    @property
    def code(self) -> int:
        return {"pareto": PARETO, "slowly_varying": SLOWLY_VARYING, "deterministic": DETERMINISTIC}[self.kind]

    @property
    def w0(self) -> float:
        """Essential infimum of the law."""
        if self.kind == "pareto":
            return 1.0
        if self.kind == "deterministic":
            return self.value
        return _support_start(self.tau, self.c, self.a)

    @property
    def kernel_args(self) -> tuple:
        return (self.code, self.tau, self.c, self.a, self.w0 if self.kind != "deterministic" else self.value)

    def to_dict(self) -> dict:
        if self.kind == "deterministic":
            return {"kind": self.kind, "value": self.value}
        if self.kind == "pareto":
            return {"kind": self.kind, "tau": self.tau}
        return {"kind": self.kind, "tau": self.tau, "c": self.c, "a": self.a}

    @classmethod
    def from_dict(cls, d: dict) -> "WeightLaw":
        return cls(**d)


@dataclass(frozen=True, eq=False)
class WeightVector:
    values: np.ndarray
    seed: int
    law: WeightLaw

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True).reshape(-1)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, WeightVector):
            return NotImplemented
        return self.seed == other.seed and self.law == other.law and np.array_equal(self.values, other.values)


# ---------------------------------------------------------------------------
# scalar kernels


@numba.njit(cache=True)
def _log_tail(tau, c, a, t):
    # log of c w^-(tau-1) log(e+w)^a at w = e^t
    return math.log(c) - (tau - 1.0) * t + a * math.log(_log_e_plus_exp(t))


@numba.njit(cache=True)
def _log_e_plus_exp(t):
    # log(e + e^t) without overflow
    if t > 1.0:
        return t + math.log1p(math.exp(1.0 - t))
    return 1.0 + math.log1p(math.exp(t - 1.0))


def _support_start(tau: float, c: float, a: float) -> float:
    if a == 0.0:
        return c ** (1.0 / (tau - 1.0))
    return math.exp(_solve_log_tail(tau, c, a, 0.0))


@numba.njit(cache=True)
def _solve_log_tail(tau, c, a, target):
    """Root t of _log_tail(t) = target (strictly decreasing in t)."""
    t = (math.log(c) - target) / (tau - 1.0)
    # fixed-point warm start; contraction factor is below a / (tau - 1) <= 1
    for _ in range(8):
        t = (math.log(c) - target + a * math.log(_log_e_plus_exp(t))) / (tau - 1.0)
    lo = -math.inf
    hi = math.inf
    for _ in range(200):
        h = _log_tail(tau, c, a, t) - target
        if h > 0.0:
            lo = t
        else:
            hi = t
        if h == 0.0:
            return t
        # d/dt log log(e + e^t) = sigmoid(t - 1) / log(e + e^t)
        slope = -(tau - 1.0) + a / ((1.0 + math.exp(1.0 - t)) * _log_e_plus_exp(t))
        step = -h / slope
        tn = t + step
        if not (tn > lo and tn < hi):
            if math.isfinite(lo) and math.isfinite(hi):
                tn = 0.5 * (lo + hi)
            elif math.isfinite(lo):
                tn = lo + 1.0 + abs(lo)
            else:
                tn = hi - 1.0 - abs(hi)
        if abs(tn - t) <= 1e-15 * max(1.0, abs(t)):
            return tn
        t = tn
    return t


@numba.njit(cache=True)
def _quantile(kind, tau, c, a, w0, u):
    """Tail quantile: the weight whose exceedance probability is u, u in (0, 1]."""
    if kind == DETERMINISTIC:
        return w0
    if u >= 1.0:
        return w0
    if kind == PARETO:
        return u ** (-1.0 / (tau - 1.0))
    if a == 0.0:
        return (c / u) ** (1.0 / (tau - 1.0))
    return math.exp(_solve_log_tail(tau, c, a, math.log(u)))


@numba.njit(cache=True)
def _quantile_array(kind, tau, c, a, w0, u):
    out = np.empty(u.shape[0])
    for i in range(u.shape[0]):
        out[i] = _quantile(kind, tau, c, a, w0, u[i])
    return out


# Gauss-Kronrod 7/15 nodes and weights on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])


@numba.njit(cache=True)
def _psi_integrand(kind, tau, c, a, w0, theta, u):
    return -math.expm1(-theta * _quantile(kind, tau, c, a, w0, u))


@numba.njit(cache=True)
def _gk15_psi(kind, tau, c, a, w0, theta, lo, hi):
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    fc = _psi_integrand(kind, tau, c, a, w0, theta, center)
    resk = fc * _WGK[7]
    resg = fc * _WG[3]
    for j in range(7):
        x = half * _XGK[j]
        f1 = _psi_integrand(kind, tau, c, a, w0, theta, center - x)
        f2 = _psi_integrand(kind, tau, c, a, w0, theta, center + x)
        resk += _WGK[j] * (f1 + f2)
        if j % 2 == 1:
            resg += _WG[j // 2] * (f1 + f2)
    return resk * half, abs((resk - resg) * half)


@numba.njit(cache=True)
def _psi_scalar(kind, tau, c, a, w0, theta, tol):
    if theta <= 0.0:
        return 0.0
    if kind == DETERMINISTIC:
        return -math.expm1(-theta * w0)
    if math.isinf(theta):
        return 1.0
    # explicit stack of intervals; an interval is accepted when its error is
    # within its length share of min(tol, 1e-12 * rough total)
    rough, _ = _gk15_psi(kind, tau, c, a, w0, theta, 0.0, 1.0)
    budget = min(tol, 1e-12 * abs(rough))
    if budget <= 0.0:
        budget = tol
    stack_lo = np.empty(400)
    stack_hi = np.empty(400)
    stack_lo[0] = 0.0
    stack_hi[0] = 1.0
    top = 1
    total = 0.0
    while top > 0:
        top -= 1
        lo = stack_lo[top]
        hi = stack_hi[top]
        val, err = _gk15_psi(kind, tau, c, a, w0, theta, lo, hi)
        # stop refining once the error is at the roundoff level of the piece
        if err <= budget * (hi - lo) or err <= 1e-14 * abs(val) or hi - lo < 1e-200 or top >= 398:
            total += val
        else:
            mid = 0.5 * (lo + hi)
            stack_lo[top] = lo
            stack_hi[top] = mid
            stack_lo[top + 1] = mid
            stack_hi[top + 1] = hi
            top += 2
    return min(max(total, 0.0), 1.0)


@numba.njit(cache=True)
def _psi_array(kind, tau, c, a, w0, theta, tol):
    out = np.empty(theta.shape[0])
    for i in range(theta.shape[0]):
        out[i] = _psi_scalar(kind, tau, c, a, w0, theta[i], tol)
    return out


# ---------------------------------------------------------------------------
# public API


def quantile(law: WeightLaw, u):
    """Inverse of the tail function: ``w`` with ``P(W > w) = u``."""
    arr = np.asarray(u, dtype=float)
    if np.any((arr <= 0) | (arr > 1)):
        raise InvalidParameterError("quantile level must lie in (0, 1]")
    out = _quantile_array(*law.kernel_args, arr.reshape(-1)).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def sample_weights(law: WeightLaw, count: int, seed: int) -> WeightVector:
    """I.i.d. weights by inversion of the tail function."""
    if law.kind == "deterministic":
        raise InvalidParameterError("the deterministic law is reserved for reference integrals")
    if count < 0:
        raise InvalidParameterError("count must be non-negative")
    rng = np.random.Generator(np.random.PCG64(seed))
    u = 1.0 - rng.random(count)  # (0, 1]
    return WeightVector(_quantile_array(*law.kernel_args, u), int(seed), law)


def tail(law: WeightLaw, w):
    """``P(W > w)``."""
    w = np.asarray(w, dtype=float)
    if law.kind == "deterministic":
        out = np.where(w < law.value, 1.0, 0.0)
    elif law.kind == "pareto":
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(w < 1.0, 1.0, np.power(np.maximum(w, 1.0), -(law.tau - 1.0)))
    else:
        w0 = law.w0
        ww = np.maximum(w, w0)
        body = law.c * ww ** (-(law.tau - 1.0)) * np.log(np.e + ww) ** law.a
        out = np.where(w < w0, 1.0, np.minimum(body, 1.0))
    return float(out) if out.ndim == 0 else out


def cdf(law: WeightLaw, w):
    return 1.0 - tail(law, w)


def fractional_moment(law: WeightLaw, s: float) -> float:
    """``E[W^s]`` for ``s >= 0``; ``inf`` when the moment diverges."""
    if s < 0:
        raise InvalidParameterError("moment order must be non-negative")
    if s == 0:
        return 1.0
    if law.kind == "deterministic":
        return law.value ** s
    k = law.tau - 1.0
    if s > k or (s == k and law.a >= -1.0):
        return math.inf
    if law.kind == "pareto":
        return k / (k - s)
    w0 = law.w0
    if law.a == 0.0:
        return w0 ** s * k / (k - s)
    # E[W^s] = w0^s + int_{w0}^inf s w^(s-1) P(W > w) dw, in t = log w;
    # the integrand decays like exp(-(k - s) t) up to a power of t
    def integrand(t):
        return math.exp(math.log(s) + s * t + _log_tail(law.tau, law.c, law.a, t))

    t0 = math.log(w0)
    scale = 1.0 / (k - s)
    val = 0.0
    for lo, hi in ((0.0, 5.0), (5.0, 40.0), (40.0, 200.0), (200.0, 2000.0)):
        part, _ = integrate.quad(integrand, t0 + lo * scale, t0 + hi * scale, limit=400, epsabs=0.0, epsrel=1e-13)
        val += part
    return w0 ** s + val


def psi(law: WeightLaw, theta, tol: float = 1e-12):
    """``E[1 - exp(-theta W)]``, vectorised over ``theta``.

    The quadrature error is bounded by ``tol`` in absolute terms and by about
    1e-12 relative to the value, whichever is smaller.
    """
    th = np.asarray(theta, dtype=float)
    if np.any(th < 0):
        raise InvalidParameterError("psi is defined for theta >= 0")
    out = _psi_array(*law.kernel_args, np.ascontiguousarray(th.reshape(-1)), tol).reshape(th.shape)
    return float(out) if out.ndim == 0 else out
