"""Degree statistics: histograms, empirical tails, Hill fits, quenched degrees."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateTailError, InsufficientDataError, InvalidParameterError
from ..graphgen import ModelParams, WeightedGraph, adjoin_point, incident_edges
from ..pointprocess import PointSet, distance
from ..weights import WeightLaw, WeightVector, psi

MIN_HILL_K = 10


@dataclass(frozen=True)
class TailFit:
    gamma_hat: float
    k: int
    stderr: float
    sample_size: int

    def to_dict(self) -> dict:
        return {"gamma_hat": self.gamma_hat, "k": self.k, "stderr": self.stderr, "sample_size": self.sample_size}


def degree_histogram(g: WeightedGraph) -> dict:
    """``{degree: count}`` over all vertices, keys ascending."""
    deg = np.asarray(g.degrees)
    if deg.size == 0:
        return {}
    counts = np.bincount(deg)
    return {int(k): int(c) for k, c in enumerate(counts) if c}


def empirical_tail(degrees) -> tuple[np.ndarray, np.ndarray]:
    """Distinct values ``s`` and the empirical ``P(D > s)``."""
    deg = np.asarray(degrees)
    n = deg.size
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    s, counts = np.unique(deg, return_counts=True)
    above = n - np.cumsum(counts)
    return s.astype(np.int64), above / n


def default_k(sample_size: int) -> int:
    return int(math.isqrt(int(sample_size)))


def hill_gamma(degrees, k: int | None = None) -> TailFit:
    """Hill estimate of the tail index from the ``k`` largest values.

    ``gamma_hat = k / sum_{i<=k} log(D_(i) / D_(k+1))`` with ``D_(1) >= D_(2) >= ...``.
    """
    deg = np.asarray(degrees, dtype=float).reshape(-1)
    n = deg.size
    if k is None:
        k = default_k(n)
    k = int(k)
    if k < MIN_HILL_K:
        raise InsufficientDataError(f"Hill estimator needs k >= {MIN_HILL_K}, got {k}")
    # D_(k+1) enters a logarithm, so it must be positive as well
    if np.count_nonzero(deg > 0) < k + 1:
        raise InsufficientDataError(f"need at least {k + 1} positive values for k = {k}")
    order = np.argsort(-deg, kind="stable")
    top = deg[order[: k + 1]]
    s = float(np.sum(np.log(top[:k] / top[k])))
    if s <= 0.0:
        raise DegenerateTailError("the k largest values coincide with the threshold; tail index undefined")
    gamma_hat = k / s
    return TailFit(gamma_hat, k, gamma_hat / math.sqrt(k), n)


def quenched_conditional_degree(ps: PointSet, law: WeightLaw, alpha: float, w: float, origin=None) -> float:
    """``sum_x psi(w dist(origin, x)^-alpha)``: expected degree of a weight-``w`` vertex at ``origin``."""
    if not w > 0:
        raise InvalidParameterError("weight must be positive")
    geom = ps.geometry
    origin = np.zeros(geom.dim) if origin is None else np.asarray(origin, dtype=float).reshape(geom.dim)
    if not bool(geom.contains(origin)[0]):
        raise InvalidParameterError("origin must lie in the box")
    if len(ps) == 0:
        return 0.0
    r = distance(geom, origin, ps.points)
    with np.errstate(divide="ignore"):
        theta = w * r ** (-float(alpha))
    return float(np.sum(psi(law, theta)))


def adjoined_degree(ps: PointSet, wv: WeightVector, params: ModelParams, edge_seed: int, w0: float,
                    radius: float = math.inf, origin=None) -> int:
    """Degree of a vertex of weight ``w0`` adjoined at ``origin``, counting neighbours within ``radius``."""
    geom = ps.geometry
    origin = np.zeros(geom.dim) if origin is None else np.asarray(origin, dtype=float)
    cand = np.arange(len(ps), dtype=np.int64)
    if math.isfinite(radius) and len(ps):
        cand = cand[distance(geom, origin, ps.points) <= radius]
    ps2, wv2 = adjoin_point(ps, wv, origin, w0)
    return int(incident_edges(ps2, wv2, params, edge_seed, len(ps), cand).size)


def truncated_degrees(ps: PointSet, wv: WeightVector, params: ModelParams, edge_seed: int, w0: float,
                      radii, origin=None) -> np.ndarray:
    """Neighbours of an adjoined vertex within each radius in ``radii``, from one edge sample."""
    geom = ps.geometry
    origin = np.zeros(geom.dim) if origin is None else np.asarray(origin, dtype=float)
    radii = np.asarray(radii, dtype=float)
    if len(ps) == 0:
        return np.zeros(radii.shape, dtype=np.int64)
    r = distance(geom, origin, ps.points)
    cand = np.flatnonzero(r <= radii.max()).astype(np.int64)
    ps2, wv2 = adjoin_point(ps, wv, origin, w0)
    nb = incident_edges(ps2, wv2, params, edge_seed, len(ps), cand)
    return np.array([int(np.count_nonzero(r[nb] <= R)) for R in radii], dtype=np.int64)
