from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..core import Location, ObjectId, ObjectRecord, OpKind, Rect, Timestamp, WorkloadOp
from .config import EngineConfig

CLEANING_STRATEGIES = ("flush", "merge", "buffered", "vacuum")


@dataclass
class EngineStats:
    flush_count: int = 0
    merge_count: int = 0
    um_size_now: int = 0
    um_size_max: int = 0
    component_count: int = 0
    component_records: list[int] = field(default_factory=list)
    memory_records: int = 0
    clean_removals: dict[str, int] = field(
        default_factory=lambda: {name: 0 for name in CLEANING_STRATEGIES}
    )
    records_scanned: int = 0
    pages_scanned: int = 0
    validation_anomalies: int = 0
    unsettled_drops: int = 0


class SpatialIndexContract(ABC):
    """Operations shared by the update-memo engine and both baselines."""

    name: str

    @abstractmethod
    def insert(self, oid: ObjectId, loc: Location) -> Timestamp:
        pass

    @abstractmethod
    def delete(self, oid: ObjectId, old_loc: Location | None = None) -> Timestamp:
        pass

    @abstractmethod
    def update(
        self, oid: ObjectId, new_loc: Location, old_loc: Location | None = None
    ) -> Timestamp:
        pass

    @abstractmethod
    def range_query(self, window: Rect) -> list[ObjectRecord]:
        pass

    @abstractmethod
    def force_flush(self) -> None:
        pass

    @abstractmethod
    def force_merge(self) -> None:
        pass

    @abstractmethod
    def scan_all(self) -> list[ObjectRecord]:
        pass

    @abstractmethod
    def stats(self) -> EngineStats:
        pass

    @abstractmethod
    def close(self) -> None:
        pass

    def apply(self, op: WorkloadOp) -> list[ObjectRecord] | None:
        if op.kind is OpKind.QUERY:
            assert op.window is not None
            return self.range_query(op.window)
        assert op.oid is not None
        if op.kind is OpKind.INSERT:
            assert op.loc is not None
            self.insert(op.oid, op.loc)
        elif op.kind is OpKind.DELETE:
            self.delete(op.oid, op.old_loc)
        else:
            assert op.loc is not None
            self.update(op.oid, op.loc, op.old_loc)
        return None


IndexFactory = Callable[[str, EngineConfig, Path], SpatialIndexContract]
