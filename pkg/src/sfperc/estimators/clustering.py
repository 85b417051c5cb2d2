"""Triangle counts and clustering coefficients: local, averaged, truncated, Palm."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import stats

from ..errors import InvalidParameterError
from ..graphgen import ModelParams, WeightedGraph, adjoin_point, decide_pairs, incident_edges
from ..pointprocess import BoxGeometry, sample_ppp
from ..seeds import derive_seed
from ..weights import sample_weights


@numba.njit(cache=True)
def _triangles(indptr, indices):
    # each triangle i < j < k is found once, from its edge (i, j)
    n = indptr.shape[0] - 1
    tri = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j <= i:
                continue
            a = indptr[i]
            a_end = indptr[i + 1]
            b = indptr[j]
            b_end = indptr[j + 1]
            while a < a_end and indices[a] <= j:
                a += 1
            while b < b_end and indices[b] <= j:
                b += 1
            while a < a_end and b < b_end:
                x = indices[a]
                y = indices[b]
                if x == y:
                    tri[i] += 1
                    tri[j] += 1
                    tri[x] += 1
                    a += 1
                    b += 1
                elif x < y:
                    a += 1
                else:
                    b += 1
    return tri


def triangle_counts(g: WeightedGraph) -> np.ndarray:
    """Number of triangles through each vertex."""
    return _triangles(np.ascontiguousarray(g.indptr), np.ascontiguousarray(g.indices))


def _cc_from_counts(tri: np.ndarray, deg: np.ndarray) -> np.ndarray:
    deg = deg.astype(float)
    pairs = deg * (deg - 1.0)
    out = np.zeros(deg.shape)
    ok = pairs > 0
    out[ok] = 2.0 * tri[ok] / pairs[ok]
    return out


def local_cc_all(g: WeightedGraph) -> np.ndarray:
    return _cc_from_counts(triangle_counts(g), np.asarray(g.degrees))


def local_cc(g: WeightedGraph, i: int) -> float:
    """``2 T_i / (D_i (D_i - 1))``, and 0 when ``D_i <= 1``."""
    if not 0 <= i < g.n_vertices:
        raise InvalidParameterError(f"vertex {i} out of range")
    nb = g.neighbors(i)
    d = nb.size
    if d <= 1:
        return 0.0
    tri = 0
    for j in nb:
        tri += np.intersect1d(nb, g.neighbors(j), assume_unique=True).size
    # every triangle was seen from both of its other endpoints
    return float(tri) / (d * (d - 1))


def _in_central_box(points: np.ndarray, n: float) -> np.ndarray:
    h = n / 2.0
    return np.all((points >= -h) & (points <= h), axis=1)


def averaged_cc(g: WeightedGraph, n: float | None = None) -> float:
    """Mean local coefficient over vertices in the centred box of side ``n``; 0 if there are none."""
    side = g.points.geometry.side
    if n is None:
        n = side
    if not 0 < n <= side:
        raise InvalidParameterError(f"window side {n} must lie in (0, {side}]")
    cc = local_cc_all(g)
    mask = _in_central_box(g.points.points, n) if n < side else np.ones(g.n_vertices, dtype=bool)
    if not mask.any():
        return 0.0
    return float(np.sum(cc[mask]) / np.count_nonzero(mask))


@dataclass(frozen=True)
class TruncationParams:
    """Mesoscopic box side ``m`` and frame fraction ``delta``."""

    m: float
    delta: float

    def __post_init__(self):
        if not self.m > 0:
            raise InvalidParameterError("m must be positive")
        if not 0 < self.delta < 0.5:
            raise InvalidParameterError("delta must lie in (0, 1/2)")

    @property
    def frame(self) -> float:
        return self.delta * self.m


def box_index(points: np.ndarray, m: float) -> np.ndarray:
    """Integer label of the m-box containing each point; box 0 is centred at the origin."""
    return np.floor(np.asarray(points, dtype=float) / m + 0.5).astype(np.int64)


def in_frame(points: np.ndarray, trunc: TruncationParams) -> np.ndarray:
    """Points within ``delta m`` of the boundary of their m-box."""
    pts = np.asarray(points, dtype=float)
    rel = pts - box_index(pts, trunc.m) * trunc.m  # in [-m/2, m/2)
    gap = trunc.m / 2.0 - np.abs(rel)
    return np.any(gap <= trunc.frame, axis=1)


@dataclass(frozen=True)
class TruncationCounts:
    """Per-vertex classification used by :func:`truncated_cc`."""

    frame: np.ndarray
    leaves: np.ndarray

    @property
    def kept(self) -> np.ndarray:
        return ~(self.frame | self.leaves)


def truncation_masks(g: WeightedGraph, trunc: TruncationParams) -> TruncationCounts:
    pts = g.points.points
    box = box_index(pts, trunc.m)
    frame = in_frame(pts, trunc)
    src = np.repeat(np.arange(g.n_vertices), g.degrees)
    crossing = np.any(box[src] != box[g.indices], axis=1)
    leaves = np.zeros(g.n_vertices, dtype=bool)
    leaves[src[crossing]] = True
    return TruncationCounts(frame, leaves)


def truncated_cc(g: WeightedGraph, trunc: TruncationParams) -> float:
    """``(1 / (lambda n^d)) sum_x CC_trunc(x)`` over all vertices of the box of side ``n``.

    ``CC_trunc(x)`` is 0 for frame vertices and for vertices with a neighbour in
    another m-box, and ``CC(x)`` otherwise.
    """
    geom = g.points.geometry
    if not trunc.m < geom.side:
        raise InvalidParameterError(f"m = {trunc.m} must be smaller than the box side {geom.side}")
    if g.n_vertices == 0:
        return 0.0
    kept = truncation_masks(g, trunc).kept
    cc = local_cc_all(g)
    return float(np.sum(np.where(kept, cc, 0.0)) / (g.points.intensity * geom.volume))


@dataclass(frozen=True)
class PalmEstimate:
    estimate: float
    stderr: float
    ci_low: float
    ci_high: float
    level: float
    replicas: int
    seed: int
    values: np.ndarray = field(repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate, "stderr": self.stderr, "ci_low": self.ci_low, "ci_high": self.ci_high,
            "level": self.level, "replicas": self.replicas, "seed": self.seed,
        }


@dataclass(frozen=True)
class CCReport:
    cc_n: float
    cc_truncated: float
    m: float
    delta: float
    n: float
    palm: PalmEstimate | None = None

    @property
    def palm_estimate(self) -> float | None:
        return None if self.palm is None else self.palm.estimate

    def to_dict(self) -> dict:
        out = {"cc_n": self.cc_n, "cc_truncated": self.cc_truncated, "m": self.m, "delta": self.delta, "n": self.n}
        out["palm"] = None if self.palm is None else self.palm.to_dict()
        return out


def cc_report(g: WeightedGraph, trunc: TruncationParams, palm: PalmEstimate | None = None) -> CCReport:
    side = g.points.geometry.side
    return CCReport(averaged_cc(g, side), truncated_cc(g, trunc), trunc.m, trunc.delta, side, palm)


def origin_cc(ps, wv, params: ModelParams, edge_seed: int, w0: float, origin=None) -> float:
    """``CC`` of a vertex with weight ``w0`` adjoined at ``origin`` (default: the origin).

    Only the edges incident to the new vertex and the edges among its
    neighbours are sampled; they coincide with the full graph on the
    augmented point set.
    """
    origin = np.zeros(ps.dim) if origin is None else np.asarray(origin, dtype=float)
    ps2, wv2 = adjoin_point(ps, wv, origin, w0)
    c = len(ps)
    nb = incident_edges(ps2, wv2, params, edge_seed, c, np.arange(c, dtype=np.int64))
    d = nb.size
    if d <= 1:
        return 0.0
    ii, jj = np.triu_indices(d, k=1)
    closed = int(np.count_nonzero(decide_pairs(ps2, wv2, params, edge_seed, nb[ii], nb[jj])))
    return 2.0 * closed / (d * (d - 1))


def palm_replica(params: ModelParams, geometry: BoxGeometry, seed: int, index: int) -> float:
    """One Palm sample of ``CC(0)``; its seeds depend only on ``(seed, index)``."""
    ps = sample_ppp(geometry, params.intensity, derive_seed(seed, "palm-points", index))
    wv = sample_weights(params.law, len(ps), derive_seed(seed, "palm-weights", index))
    w0 = float(sample_weights(params.law, 1, derive_seed(seed, "palm-origin-weight", index)).values[0])
    return origin_cc(ps, wv, params, derive_seed(seed, "palm-edges", index), w0)


def palm_cc_estimate(params: ModelParams, geometry: BoxGeometry, replicas: int, seed: int,
                     level: float = 0.95, threads: int = 1) -> PalmEstimate:
    """Monte Carlo mean of ``CC(0)`` under the Palm law with a normal-approximation CI."""
    if replicas < 2:
        raise InvalidParameterError("need at least two replicas")
    if not 0 < level < 1:
        raise InvalidParameterError("confidence level must lie in (0, 1)")
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as ex:
            vals = list(ex.map(lambda r: palm_replica(params, geometry, seed, r), range(replicas)))
    else:
        vals = [palm_replica(params, geometry, seed, r) for r in range(replicas)]
    values = np.asarray(vals, dtype=float)
    mean = float(np.sum(values) / replicas)
    se = float(np.std(values, ddof=1) / math.sqrt(replicas))
    z = float(stats.norm.ppf(0.5 + level / 2.0))
    return PalmEstimate(mean, se, mean - z * se, mean + z * se, level, replicas, int(seed), values)
