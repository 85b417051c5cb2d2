import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sfperc.errors import InvalidParameterError
from sfperc.pointprocess import (
    BoxGeometry,
    Topology,
    build_cell_grid,
    default_cell_side,
    distance,
    sample_ppp,
    wrap_displacement,
)


def test_geometry_validation():
    with pytest.raises(InvalidParameterError):
        BoxGeometry(0, 10.0)
    with pytest.raises(InvalidParameterError):
        BoxGeometry(2, 0.0)
    with pytest.raises(InvalidParameterError):
        BoxGeometry(2, -1.0)
    g = BoxGeometry(2, 10.0)
    assert g.topology is Topology.TORUS and g.volume == 100.0


def test_sample_rejects_bad_intensity():
    with pytest.raises(InvalidParameterError):
        sample_ppp(BoxGeometry(2, 10.0), 0.0, 1)
    with pytest.raises(InvalidParameterError):
        sample_ppp(BoxGeometry(2, 10.0), -1.0, 1)


def test_distance_examples():
    free = BoxGeometry(2, 10.0, "free")
    torus = BoxGeometry(2, 10.0)
    assert distance(free, [0, 0], [3, 4]) == 5.0
    assert distance(torus, [-4.5, 0], [4.5, 0]) == pytest.approx(1.0)
    assert distance(torus, [1.25, -3.0], [1.25, -3.0]) == 0.0


def test_points_inside_box_and_regeneration():
    g = BoxGeometry(3, 7.0)
    a = sample_ppp(g, 2.0, 99)
    b = sample_ppp(g, 2.0, 99)
    assert a == b
    assert np.all(np.abs(a.points) <= 3.5)
    assert not a.points.flags.writeable


def test_count_mean_and_variance():
    # d=2, n=10, lambda=1: Poisson(100) over 500 seeds, mean and variance within 4 SE
    counts = np.array([len(sample_ppp(BoxGeometry(2, 10.0), 1.0, s)) for s in range(500)], dtype=float)
    se_mean = math.sqrt(100 / 500)
    assert abs(counts.mean() - 100) <= 4 * se_mean
    # Var of the sample variance for Poisson(mu): (mu + 2 mu^2 (n/(n-1))) / n approximately
    se_var = math.sqrt((100 + 2 * 100 ** 2) / 500)
    assert abs(counts.var(ddof=1) - 100) <= 4 * se_var


def test_small_intensity_mean_count():
    counts = [len(sample_ppp(BoxGeometry(1, 4.0), 0.5, s)) for s in range(2000)]
    assert abs(np.mean(counts) - 2.0) <= 4 * math.sqrt(2.0 / 2000)


def test_disjoint_subbox_counts_uncorrelated():
    g = BoxGeometry(2, 10.0)
    left, right = [], []
    for s in range(600):
        p = sample_ppp(g, 1.0, 10_000 + s).points
        left.append(np.count_nonzero(p[:, 0] < 0))
        right.append(np.count_nonzero(p[:, 0] >= 0))
    r = np.corrcoef(left, right)[0, 1]
    assert abs(r) <= 4 / math.sqrt(600)


def test_void_probability_small_scale():
    # isolated points at r=1 on a 30x30 torus: lambda n^d exp(-pi)
    from sfperc.estimators import isolated_count

    g = BoxGeometry(2, 30.0)
    vals = np.array([isolated_count(sample_ppp(g, 1.0, s).points, g, 1.0) for s in range(300)], dtype=float)
    expected = 900 * math.exp(-math.pi)
    assert abs(vals.mean() - expected) <= 4 * vals.std(ddof=1) / math.sqrt(vals.size)


coord = st.floats(-5.0, 5.0, allow_nan=False)
point2 = st.tuples(coord, coord)


@given(point2, point2, point2)
def test_torus_metric_properties(x, y, z):
    g = BoxGeometry(2, 10.0)
    f = BoxGeometry(2, 10.0, "free")
    dxy, dyx = distance(g, x, y), distance(g, y, x)
    assert dxy == pytest.approx(dyx, abs=1e-12)
    assert dxy <= distance(g, x, z) + distance(g, z, y) + 1e-9
    assert dxy <= distance(f, x, y) + 1e-12
    wrapped = np.abs(wrap_displacement(np.subtract(y, x), 10.0))
    assert np.all(wrapped <= 5.0 + 1e-12)


def test_cell_grid_examples():
    g = BoxGeometry(2, 10.0)
    one = sample_ppp(g, 1.0, 1).with_points([[0.0, 0.0]])
    grid = build_cell_grid(one, 5.0)
    assert len(grid.cells) == 1
    ps = sample_ppp(g, 3.0, 4)
    assert len(build_cell_grid(ps, 10.0).cells) == 1
    with pytest.raises(InvalidParameterError):
        build_cell_grid(ps, 0.0)
    with pytest.raises(InvalidParameterError):
        build_cell_grid(ps, 11.0)


@given(st.integers(0, 2 ** 32), st.floats(0.3, 7.0), st.integers(1, 3))
def test_cell_grid_partition(seed, cell_side, d):
    g = BoxGeometry(d, 7.0)
    ps = sample_ppp(g, 2.0 if d < 3 else 0.5, seed)
    grid = build_cell_grid(ps, cell_side)
    members = sorted(i for v in grid.cells.values() for i in v)
    assert members == list(range(len(ps)))
    assert len(grid.cells) <= math.ceil(7.0 / cell_side) ** d
    for key, idx in grid.cells.items():
        for i in idx:
            assert grid.cell_of(ps.points[i]) == key
            lo = -3.5 + np.array(key) * grid.cell_side
            assert np.all(ps.points[i] >= lo - 1e-9) and np.all(ps.points[i] <= lo + grid.cell_side + 1e-9)


@pytest.mark.parametrize("side", [0.5, 1.0, 7.3, 100.0])
def test_default_cell_side_tiles_box(side):
    c = default_cell_side(side)
    assert c >= 1.0 or side < 1.0
    assert math.isclose(side / c, round(side / c))
