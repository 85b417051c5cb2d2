"""Homogeneous Poisson point processes in a centred box, plus the box metric."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError


class Topology(str, enum.Enum):
    TORUS = "torus"
    FREE = "free"


@dataclass(frozen=True)
class BoxGeometry:
    """The d-cube of side ``side`` centred at the origin.

    With ``Topology.TORUS`` opposite faces are identified and distances use
    the minimum-image convention.
    """

    dim: int
    side: float
    topology: Topology = Topology.TORUS

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidParameterError(f"dimension must be a positive integer, got {self.dim}")
        if not (self.side > 0 and math.isfinite(self.side)):
            raise InvalidParameterError(f"box side must be positive and finite, got {self.side}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "side", float(self.side))
        object.__setattr__(self, "topology", Topology(self.topology))

    @property
    def volume(self) -> float:
        return self.side ** self.dim

    @property
    def is_torus(self) -> bool:
        return self.topology is Topology.TORUS

    def contains(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        h = self.side / 2
        return np.all((x >= -h) & (x <= h), axis=-1)


def wrap_displacement(dx: np.ndarray, side: float) -> np.ndarray:
    """Minimum-image wrap of coordinate differences into [-side/2, side/2]."""
    return dx - side * np.round(dx / side)


def displacement(geometry: BoxGeometry, x, y) -> np.ndarray:
    dx = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    if geometry.is_torus:
        dx = wrap_displacement(dx, geometry.side)
    return dx


def distance(geometry: BoxGeometry, x, y):
    """Euclidean distance between ``x`` and ``y`` (broadcasts over leading axes)."""
    dx = displacement(geometry, x, y)
    return np.sqrt(np.sum(dx * dx, axis=-1))


@dataclass(frozen=True, eq=False)
class PointSet:
    geometry: BoxGeometry
    points: np.ndarray
    intensity: float
    seed: int

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True).reshape(-1, self.geometry.dim)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.geometry.dim

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and self.intensity == other.intensity
            and self.seed == other.seed
            and np.array_equal(self.points, other.points)
        )

    def with_points(self, points: np.ndarray) -> "PointSet":
        return PointSet(self.geometry, points, self.intensity, self.seed)


def sample_ppp(geometry: BoxGeometry, intensity: float, seed: int) -> PointSet:
    """Sample a homogeneous PPP of the given intensity in ``geometry``.

    The count is drawn first, then i.i.d. uniform coordinates, both from a
    single PCG64 stream seeded by ``seed``.
    """
    if not (intensity > 0 and math.isfinite(intensity)):
        raise InvalidParameterError(f"intensity must be positive, got {intensity}")
    rng = np.random.Generator(np.random.PCG64(seed))
    count = rng.poisson(intensity * geometry.volume)
    h = geometry.side / 2
    pts = rng.uniform(-h, h, size=(count, geometry.dim))
    return PointSet(geometry, pts, float(intensity), int(seed))


def default_cell_side(side: float) -> float:
    """Cell side close to 1 that tiles the box exactly."""
    return side / max(1, math.floor(side))


@dataclass(frozen=True, eq=False)
class CellGrid:
    """Index of point ids by cubic cell.

    ``order`` lists point indices grouped by cell (row-major flat cell id),
    ``start`` has one entry per cell plus a sentinel so cell ``c`` owns
    ``order[start[c]:start[c + 1]]``.
    """

    cell_side: float
    shape: tuple
    order: np.ndarray
    start: np.ndarray
    side: float

    @property
    def ncells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cells(self) -> dict:
        out = {}
        for flat in range(self.ncells):
            lo, hi = self.start[flat], self.start[flat + 1]
            if hi > lo:
                out[np.unravel_index(flat, self.shape)] = self.order[lo:hi].tolist()
        return {tuple(int(v) for v in k): v for k, v in out.items()}

    def members(self, flat: int) -> np.ndarray:
        return self.order[self.start[flat]:self.start[flat + 1]]

    def cell_of(self, x) -> tuple:
        idx = cell_index(np.atleast_2d(np.asarray(x, dtype=float)), self.side, self.cell_side, self.shape)
        return tuple(int(v) for v in idx[0])


def cell_index(points: np.ndarray, side: float, cell_side: float, shape) -> np.ndarray:
    idx = np.floor((points + side / 2) / cell_side).astype(np.int64)
    return np.clip(idx, 0, np.asarray(shape) - 1)


def build_cell_grid(ps: PointSet, cell_side: float | None = None) -> CellGrid:
    side = ps.geometry.side
    if cell_side is None:
        cell_side = default_cell_side(side)
    if not cell_side > 0:
        raise InvalidParameterError(f"cell side must be positive, got {cell_side}")
    if cell_side > side:
        raise InvalidParameterError(f"cell side {cell_side} exceeds box side {side}")
    per_axis = max(1, math.ceil(side / cell_side - 1e-9))
    shape = (per_axis,) * ps.dim
    if len(ps):
        idx = cell_index(ps.points, side, cell_side, shape)
        flat = np.ravel_multi_index(idx.T, shape)
    else:
        flat = np.zeros(0, dtype=np.int64)
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat, minlength=int(np.prod(shape)))
    start = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return CellGrid(float(cell_side), shape, order.astype(np.int64), start, side)
