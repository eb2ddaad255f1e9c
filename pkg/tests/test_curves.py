import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lsmrum.domain.core import Location, Rect
from lsmrum.domain.curve import (
    CELLS,
    MAX_INTERVALS,
    Curve,
    cell_keys,
    curve_key,
    quantize,
    window_intervals,
)

Xs = st.floats(-180, 180, allow_nan=False)
Ys = st.floats(-90, 90, allow_nan=False)


def _cells(xs, ys, curve: Curve) -> list[int]:
    return cell_keys(
        np.array(xs, dtype=np.int64), np.array(ys, dtype=np.int64), curve
    ).tolist()


def test_quantize_should_clamp_outside_world():
    qx, qy = quantize([-500.0, 0.0, 500.0], [-500.0, 0.0, 500.0])

    assert qx.tolist() == [0, CELLS // 2, CELLS - 1]
    assert qy.tolist() == [0, CELLS // 2, CELLS - 1]


def test_zorder_should_interleave_bits():
    assert _cells([0, 1, 0, 1, 2], [0, 0, 1, 1, 0], Curve.ZORDER) == [0, 1, 2, 3, 4]


def test_hilbert_should_cover_origin_block_with_first_keys():
    xs, ys = zip(*[(x, y) for x in range(4) for y in range(4)])

    assert sorted(_cells(xs, ys, Curve.HILBERT)) == list(range(16))


def test_hilbert_should_step_between_grid_neighbours():
    xs, ys = zip(*[(x, y) for x in range(8) for y in range(8)])
    keys = _cells(xs, ys, Curve.HILBERT)

    path = [cell for _, cell in sorted(zip(keys, zip(xs, ys)))]

    assert sorted(keys) == list(range(64))
    for (x1, y1), (x2, y2) in zip(path, path[1:]):
        assert abs(x1 - x2) + abs(y1 - y2) == 1


@pytest.mark.parametrize("curve", list(Curve))
def test_curve_key_should_be_deterministic(curve):
    loc = Location(12.5, -33.25)

    assert curve_key(loc, curve) == curve_key(Location(12.5, -33.25), curve)


@pytest.mark.parametrize("curve", list(Curve))
def test_curve_file_id_should_round_trip(curve):
    assert Curve.from_file_id(curve.file_id) is curve


def test_curve_from_file_id_should_raise_when_unknown():
    with pytest.raises(ValueError):
        Curve.from_file_id(7)


@pytest.mark.parametrize("curve", list(Curve))
@given(
    points=st.lists(st.tuples(Xs, Ys), min_size=1, max_size=40),
    corner=st.tuples(Xs, Ys),
    size=st.tuples(st.floats(0, 40), st.floats(0, 20)),
)
@settings(max_examples=100, deadline=None)
def test_window_intervals_should_cover_every_point_inside_window(
    curve, points, corner, size
):
    x, y = corner
    window = Rect.of(x, y, x + size[0], y + size[1])
    intervals = window_intervals(window, curve)

    assert len(intervals) <= MAX_INTERVALS
    for px, py in points:
        loc = Location(px, py)
        if window.contains_point(loc):
            key = curve_key(loc, curve)
            assert any(lo <= key < hi for lo, hi in intervals)


def test_window_intervals_should_be_sorted_and_disjoint():
    intervals = window_intervals(Rect.of(-10, -10, 25, 5), Curve.HILBERT)

    for (_, end), (start, _) in zip(intervals, intervals[1:]):
        assert end < start


def test_window_intervals_should_span_everything_when_window_is_world():
    assert window_intervals(Rect.of(-180, -90, 180, 90), Curve.ZORDER) == [
        (0, CELLS * CELLS)
    ]
