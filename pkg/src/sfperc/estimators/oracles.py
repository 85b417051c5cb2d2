"""Monte Carlo counterparts of the Poisson identities in :mod:`sfperc.theory`."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..errors import InvalidParameterError
from ..pointprocess import BoxGeometry, sample_ppp
from ..theory import RadialStep, unit_ball_volume


@dataclass(frozen=True)
class SlivnyakReport:
    empirical: float
    stderr: float
    analytic: float
    seeds: tuple

    @property
    def z(self) -> float:
        return (self.empirical - self.analytic) / self.stderr if self.stderr > 0 else math.inf

    def to_dict(self) -> dict:
        return {"empirical": self.empirical, "stderr": self.stderr, "analytic": self.analytic, "seeds": list(self.seeds)}


def isolated_count(points: np.ndarray, geometry: BoxGeometry, r: float) -> int:
    """Number of points with no other point within distance ``r``."""
    n = points.shape[0]
    if n <= 1:
        return n
    if geometry.is_torus:
        # the periodic tree wants coordinates in [0, side)
        tree = cKDTree(np.mod(points + geometry.side / 2, geometry.side), boxsize=geometry.side)
        data = tree.data
    else:
        tree = cKDTree(points)
        data = points
    dist, _ = tree.query(data, k=2)
    return int(np.count_nonzero(dist[:, 1] > r))


def void_analytic(geometry: BoxGeometry, intensity: float, r: float) -> float:
    """``lambda n^d exp(-lambda v_d r^d)``: expected number of isolated points on the torus."""
    return intensity * geometry.volume * math.exp(-intensity * unit_ball_volume(geometry.dim) * r ** geometry.dim)


def slivnyak_mecke_check(geometry: BoxGeometry, intensity: float, r: float, seeds) -> SlivnyakReport:
    """Empirical mean of the isolated-point count over ``seeds`` against its Slivnyak-Mecke value."""
    if not geometry.is_torus:
        raise InvalidParameterError("the closed form holds on the torus only")
    if not 0 <= r < geometry.side / 2:
        raise InvalidParameterError("need 0 <= r < side / 2")
    seeds = tuple(int(s) for s in seeds)
    if len(seeds) < 2:
        raise InvalidParameterError("need at least two seeds")
    counts = np.array([isolated_count(sample_ppp(geometry, intensity, s).points, geometry, r) for s in seeds],
                      dtype=float)
    se = float(np.std(counts, ddof=1) / math.sqrt(len(seeds)))
    return SlivnyakReport(float(np.mean(counts)), se, void_analytic(geometry, intensity, r), seeds)


@dataclass(frozen=True)
class CampbellSample:
    """Monte Carlo moments of ``S = sum_x f(x)`` with standard errors."""

    mean: float
    mean_se: float
    variance: float
    variance_se: float
    log_mgf: float
    log_mgf_se: float
    samples: int


def sample_step_sums(f: RadialStep, intensity: float, samples: int, seed: int) -> np.ndarray:
    """Independent draws of ``S = sum_x f(x)`` over a PPP restricted to the support of ``f``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    R = f.radii[-1]
    counts = rng.poisson(intensity * unit_ball_volume(f.d) * R ** f.d, size=samples)
    # radii of uniform points in the ball of radius R
    radii = R * rng.random(int(counts.sum())) ** (1.0 / f.d)
    vals = f(radii)
    owner = np.repeat(np.arange(samples), counts)
    return np.bincount(owner, weights=vals, minlength=samples)


def campbell_monte_carlo(f: RadialStep, intensity: float, theta: float, samples: int, seed: int) -> CampbellSample:
    s = sample_step_sums(f, intensity, samples, seed)
    n = s.size
    mean = float(np.mean(s))
    var = float(np.var(s, ddof=1))
    c = s - mean
    m4 = float(np.mean(c ** 4))
    var_se = math.sqrt(max(m4 - var * var, 0.0) / n)
    e = np.exp(theta * s)
    m = float(np.mean(e))
    log_se = float(np.std(e, ddof=1) / (math.sqrt(n) * m))
    return CampbellSample(mean, math.sqrt(var / n), var, var_se, math.log(m), log_se, n)
