"""Disk component files.

Layout (little-endian)::

    magic "LRUM" | version u16 | record_count u64 | min_ts u64 | max_ts u64
    | curve id u8 | 13 reserved zero bytes
    record_count x (oid u64, ts u64, x f64, y f64), ascending by curve key
    crc32 of everything above, u32

Files are written under a temporary name and renamed into place.
"""

import logging
import math
import os
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
import numpy.typing as npt

from ..domain.core import Location, ObjectId, ObjectRecord, Rect, Timestamp
from ..domain.curve import DEFAULT_WORLD, Curve, World, curve_keys, window_intervals

logger = logging.getLogger(__name__)

MAGIC = b"LRUM"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sHQQQB13x")
TRAILER = struct.Struct("<I")
RECORD_DTYPE = np.dtype([("oid", "<u8"), ("ts", "<u8"), ("x", "<f8"), ("y", "<f8")])
COMPONENT_SUFFIX = ".lrum"

RecordArray = npt.NDArray[np.void]


class StorageError(Exception):
    pass


class ComponentFormatError(StorageError):
    pass


class ComponentCorruptionError(ComponentFormatError):
    pass


def records_to_array(records: Iterable[ObjectRecord]) -> RecordArray:
    return np.array(
        [(r.oid, r.ts, r.loc.x, r.loc.y) for r in records], dtype=RECORD_DTYPE
    )


def array_to_records(arr: RecordArray) -> list[ObjectRecord]:
    return [
        ObjectRecord(Location(x, y), ObjectId(oid), Timestamp(ts))
        for oid, ts, x, y in arr.tolist()
    ]


def encode_component(records: RecordArray, curve: Curve) -> bytes:
    count = len(records)
    min_ts = int(records["ts"].min()) if count else 0
    max_ts = int(records["ts"].max()) if count else 0
    body = (
        HEADER.pack(MAGIC, FORMAT_VERSION, count, min_ts, max_ts, curve.file_id)
        + np.ascontiguousarray(records, dtype=RECORD_DTYPE).tobytes()
    )
    return body + TRAILER.pack(zlib.crc32(body))


def decode_component(data: bytes) -> tuple[int, int, Curve, RecordArray]:
    """Validate a component image; returns (min_ts, max_ts, curve, records)."""
    if len(data) < HEADER.size + TRAILER.size:
        raise ComponentFormatError(
            f"Component is {len(data)} bytes, shorter than header and trailer"
        )
    magic, version, count, min_ts, max_ts, curve_id = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ComponentFormatError(f"Bad magic {magic!r}")
    expected = HEADER.size + count * RECORD_DTYPE.itemsize + TRAILER.size
    if len(data) != expected:
        raise ComponentFormatError(
            f"Component holds {len(data)} bytes, header declares {count} records "
            f"({expected} bytes)"
        )
    (stored_crc,) = TRAILER.unpack_from(data, len(data) - TRAILER.size)
    if zlib.crc32(data[: -TRAILER.size]) != stored_crc:
        raise ComponentCorruptionError("CRC mismatch")
    if version != FORMAT_VERSION:
        raise ComponentFormatError(f"Unsupported format version {version}")
    try:
        curve = Curve.from_file_id(curve_id)
    except ValueError as e:
        raise ComponentFormatError(str(e)) from None
    records = np.frombuffer(
        data, dtype=RECORD_DTYPE, count=count, offset=HEADER.size
    ).copy()
    return min_ts, max_ts, curve, records


def sort_by_curve(
    records: RecordArray, curve: Curve, world: World = DEFAULT_WORLD
) -> tuple[RecordArray, npt.NDArray[np.uint64]]:
    keys = curve_keys(records["x"], records["y"], curve, world)
    order = np.argsort(keys, kind="stable")
    return records[order], keys[order]


def _write_atomically(path: Path, payload: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "wb") as f:
            f.write(payload)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except OSError as e:
        tmp.unlink(missing_ok=True)
        raise StorageError(f"Failed to write {path}: {e}") from e


def write_u64_array(path: Path, values: npt.ArrayLike) -> None:
    _write_atomically(path, np.asarray(values, dtype="<u8").tobytes())


def read_u64_array(path: Path) -> npt.NDArray[np.uint64]:
    try:
        data = path.read_bytes()
    except OSError as e:
        raise StorageError(f"Failed to read {path}: {e}") from e
    if len(data) % 8:
        raise ComponentFormatError(f"{path} is not a whole number of u64 values")
    return np.frombuffer(data, dtype="<u8").astype(np.uint64)


@dataclass
class ScanResult:
    records: list[ObjectRecord]
    scanned: int
    pages: int


@dataclass
class DiskComponent:
    id: int
    path: Path
    record_count: int
    min_ts: int
    max_ts: int
    curve: Curve
    records: RecordArray = field(repr=False)
    keys: npt.NDArray[np.uint64] = field(repr=False)
    world: World = DEFAULT_WORLD

    @property
    def file_size(self) -> int:
        return HEADER.size + self.record_count * RECORD_DTYPE.itemsize + TRAILER.size

    def __len__(self) -> int:
        return self.record_count

    def iter_records(self) -> Iterator[ObjectRecord]:
        yield from array_to_records(self.records)

    def full_scan(self, window: Rect) -> ScanResult:
        return ScanResult(
            array_to_records(self.records[self._window_mask(self.records, window)]),
            scanned=self.record_count,
            pages=self._pages(self.record_count),
        )

    def prune_scan(self, window: Rect, page_size: int = 2048) -> ScanResult:
        if self.record_count == 0:
            return ScanResult([], 0, 0)
        slices = []
        scanned = pages = 0
        for lo, hi in window_intervals(window, self.curve, self.world):
            start = int(np.searchsorted(self.keys, np.uint64(lo), side="left"))
            end = int(np.searchsorted(self.keys, np.uint64(hi), side="left"))
            if end > start:
                slices.append(self.records[start:end])
                scanned += end - start
                pages += self._pages(end - start, page_size)
        if not slices:
            return ScanResult([], 0, 0)
        candidates = np.concatenate(slices)
        hits = candidates[self._window_mask(candidates, window)]
        return ScanResult(array_to_records(hits), scanned, pages)

    @staticmethod
    def _window_mask(arr: RecordArray, window: Rect) -> npt.NDArray[np.bool_]:
        return (
            (arr["x"] >= window.min.x)
            & (arr["x"] <= window.max.x)
            & (arr["y"] >= window.min.y)
            & (arr["y"] <= window.max.y)
        )

    @staticmethod
    def _pages(count: int, page_size: int = 2048) -> int:
        return math.ceil(count * RECORD_DTYPE.itemsize / page_size)


class ComponentStore:
    """Writes, opens and retires the component files of one index directory."""

    def __init__(
        self,
        directory: Path,
        curve: Curve = Curve.HILBERT,
        world: World = DEFAULT_WORLD,
        prefix: str = "component",
    ) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.curve = curve
        self.world = world
        self.prefix = prefix
        self._next_id = 1

    def allocate_id(self) -> int:
        component_id = self._next_id
        self._next_id += 1
        return component_id

    def path_for(self, component_id: int, suffix: str = COMPONENT_SUFFIX) -> Path:
        return self.directory / f"{self.prefix}-{component_id:06d}{suffix}"

    def sort(self, records: RecordArray) -> tuple[RecordArray, npt.NDArray[np.uint64]]:
        return sort_by_curve(records, self.curve, self.world)

    def write(
        self,
        records: RecordArray,
        keys: npt.NDArray[np.uint64] | None = None,
        component_id: int | None = None,
    ) -> DiskComponent:
        """Persist curve-sorted records as a new immutable component."""
        if keys is None:
            records, keys = self.sort(records)
        if component_id is None:
            component_id = self.allocate_id()
        path = self.path_for(component_id)
        _write_atomically(path, encode_component(records, self.curve))
        count = len(records)
        logger.debug("Wrote %s with %d records", path.name, count)
        return DiskComponent(
            id=component_id,
            path=path,
            record_count=count,
            min_ts=int(records["ts"].min()) if count else 0,
            max_ts=int(records["ts"].max()) if count else 0,
            curve=self.curve,
            records=records,
            keys=keys,
            world=self.world,
        )

    def remove(self, component: DiskComponent, *sidecars: str) -> None:
        component.path.unlink(missing_ok=True)
        for suffix in sidecars:
            self.path_for(component.id, suffix).unlink(missing_ok=True)


def read_component(
    path: Path, world: World = DEFAULT_WORLD, component_id: int = 0
) -> DiskComponent:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise StorageError(f"Failed to read {path}: {e}") from e
    min_ts, max_ts, curve, records = decode_component(data)
    keys = curve_keys(records["x"], records["y"], curve, world)
    return DiskComponent(
        id=component_id,
        path=Path(path),
        record_count=len(records),
        min_ts=min_ts,
        max_ts=max_ts,
        curve=curve,
        records=records,
        keys=keys,
        world=world,
    )
