"""Space-filling curve keys over a quantized world box.

Both curves work on a 2**ORDER x 2**ORDER grid. Every aligned block of
2**k x 2**k cells covers one contiguous key range of length 4**k on either
curve, which is what window pruning relies on.
"""

from enum import Enum
from typing import Sequence

import numpy as np
import numpy.typing as npt

from .core import Location, Rect

ORDER = 16
CELLS = 1 << ORDER
DEFAULT_WORLD = (-180.0, -90.0, 180.0, 90.0)
MAX_INTERVALS = 64

World = tuple[float, float, float, float]
KeyArray = npt.NDArray[np.uint64]


class Curve(str, Enum):
    HILBERT = "hilbert"
    ZORDER = "zorder"

    @property
    def file_id(self) -> int:
        return 0 if self is Curve.HILBERT else 1

    @classmethod
    def from_file_id(cls, value: int) -> "Curve":
        if value == 0:
            return cls.HILBERT
        if value == 1:
            return cls.ZORDER
        raise ValueError(f"Unknown curve id {value}")


def quantize(
    xs: npt.ArrayLike, ys: npt.ArrayLike, world: World = DEFAULT_WORLD
) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    """Map coordinates to grid cells, clamping anything outside the box."""
    min_x, min_y, max_x, max_y = world
    fx = (np.asarray(xs, dtype=np.float64) - min_x) / (max_x - min_x) * CELLS
    fy = (np.asarray(ys, dtype=np.float64) - min_y) / (max_y - min_y) * CELLS
    qx = np.clip(np.floor(fx), 0, CELLS - 1).astype(np.int64)
    qy = np.clip(np.floor(fy), 0, CELLS - 1).astype(np.int64)
    return qx, qy


def _part1by1(n: npt.NDArray[np.int64]) -> npt.NDArray[np.int64]:
    # http://graphics.stanford.edu/~seander/bithacks.html#InterleaveBMN
    n = n & 0x0000FFFF
    n = (n | (n << 8)) & 0x00FF00FF
    n = (n | (n << 4)) & 0x0F0F0F0F
    n = (n | (n << 2)) & 0x33333333
    n = (n | (n << 1)) & 0x55555555
    return n


def zorder_cells(qx: npt.NDArray[np.int64], qy: npt.NDArray[np.int64]) -> KeyArray:
    return (_part1by1(qx) | (_part1by1(qy) << 1)).astype(np.uint64)


def hilbert_cells(qx: npt.NDArray[np.int64], qy: npt.NDArray[np.int64]) -> KeyArray:
    x = qx.astype(np.int64, copy=True)
    y = qy.astype(np.int64, copy=True)
    d = np.zeros(x.shape, dtype=np.int64)
    s = CELLS >> 1
    while s > 0:
        rx = ((x & s) > 0).astype(np.int64)
        ry = ((y & s) > 0).astype(np.int64)
        d += s * s * ((3 * rx) ^ ry)
        flip = (ry == 0) & (rx == 1)
        x = np.where(flip, CELLS - 1 - x, x)
        y = np.where(flip, CELLS - 1 - y, y)
        swap = ry == 0
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        s >>= 1
    return d.astype(np.uint64)


def cell_keys(
    qx: npt.NDArray[np.int64], qy: npt.NDArray[np.int64], curve: Curve
) -> KeyArray:
    if curve is Curve.ZORDER:
        return zorder_cells(qx, qy)
    return hilbert_cells(qx, qy)


def curve_keys(
    xs: npt.ArrayLike,
    ys: npt.ArrayLike,
    curve: Curve = Curve.HILBERT,
    world: World = DEFAULT_WORLD,
) -> KeyArray:
    qx, qy = quantize(xs, ys, world)
    return cell_keys(qx, qy, curve)


def curve_key(
    loc: Location, curve: Curve = Curve.HILBERT, world: World = DEFAULT_WORLD
) -> int:
    return int(curve_keys([loc.x], [loc.y], curve, world)[0])


def window_intervals(
    window: Rect,
    curve: Curve = Curve.HILBERT,
    world: World = DEFAULT_WORLD,
    max_intervals: int = MAX_INTERVALS,
) -> list[tuple[int, int]]:
    """Half-open key ranges covering every cell the window touches.

    The window's cell range is decomposed top-down into aligned quadtree
    blocks; blocks that stay partial once the interval budget is spent are
    taken whole, so the cover may be wider than the window but never narrower.
    """
    (qx1, qx2), (qy1, qy2) = (
        quantize([window.min.x, window.max.x], [window.min.y, window.max.y], world)
    )
    lo_x, hi_x, lo_y, hi_y = int(qx1), int(qx2), int(qy1), int(qy2)

    blocks: list[tuple[int, int, int]] = []
    frontier = [(0, 0, ORDER)]
    while frontier:
        partial: list[tuple[int, int, int]] = []
        for x0, y0, k in frontier:
            x1 = x0 + (1 << k) - 1
            y1 = y0 + (1 << k) - 1
            if x0 > hi_x or x1 < lo_x or y0 > hi_y or y1 < lo_y:
                continue
            inside = lo_x <= x0 and x1 <= hi_x and lo_y <= y0 and y1 <= hi_y
            if inside or k == 0:
                blocks.append((x0, y0, k))
            else:
                partial.append((x0, y0, k))
        if len(blocks) + 4 * len(partial) > max_intervals:
            blocks.extend(partial)
            break
        frontier = [
            (x0 + dx, y0 + dy, k - 1)
            for x0, y0, k in partial
            for dx in (0, 1 << (k - 1))
            for dy in (0, 1 << (k - 1))
        ]

    return _block_ranges(blocks, curve)


def _block_ranges(
    blocks: Sequence[tuple[int, int, int]], curve: Curve
) -> list[tuple[int, int]]:
    if not blocks:
        return []
    xs = np.array([b[0] for b in blocks], dtype=np.int64)
    ys = np.array([b[1] for b in blocks], dtype=np.int64)
    keys = cell_keys(xs, ys, curve)

    ranges = []
    for key, (_, _, k) in zip(keys.tolist(), blocks):
        span = 2 * k
        start = (key >> span) << span
        ranges.append((start, start + (1 << span)))
    ranges.sort()

    merged = [ranges[0]]
    for start, end in ranges[1:]:
        last_start, last_end = merged[-1]
        if start <= last_end:
            merged[-1] = (last_start, max(last_end, end))
        else:
            merged.append((start, end))
    return merged
