"""Eager baseline: every R-tree component is paired with a deleted-key set.

A delete removes the old copy from the memory tree when it is still there and
records the key in the memory component's deleted-key set. A candidate from
component c is valid unless a newer component's set holds its key.
"""

import logging
from pathlib import Path

import numpy as np
import numpy.typing as npt
from sortedcontainers import SortedSet

from ...domain.contracts.config import EngineConfig
from ...domain.core import Location, ObjectId, ObjectRecord, Timestamp
from ..storage import DiskComponent, RecordArray, read_u64_array, write_u64_array
from .base import EngineError, KeepMask, LsmIndex

logger = logging.getLogger(__name__)

DELETED_SUFFIX = ".deleted"


class EagerIndex(LsmIndex):
    name = "eager"
    sidecars = (DELETED_SUFFIX,)

    def __init__(self, config: EngineConfig, data_dir: Path) -> None:
        self._deleted: SortedSet = SortedSet()
        self._component_deleted: dict[int, SortedSet] = {}
        self.memory_removals = 0
        super().__init__(config, data_dir)

    def _has_unflushed_state(self) -> bool:
        return self._tree.size > 0 or bool(self._deleted)

    def insert(self, oid: ObjectId, loc: Location) -> Timestamp:
        with self._lock.gen_wlock():
            self._check_open()
            ts = self._clock.next()
            self._tree.insert(ObjectRecord(loc, oid, ts))
            self._maybe_flush_locked()
        return ts

    def delete(self, oid: ObjectId, old_loc: Location | None = None) -> Timestamp:
        if old_loc is None:
            raise EngineError(f"eager delete of oid {oid} needs its old location")
        with self._lock.gen_wlock():
            self._check_open()
            ts = self._clock.next()
            self._remove_old(oid, old_loc)
        return ts

    def update(
        self, oid: ObjectId, new_loc: Location, old_loc: Location | None = None
    ) -> Timestamp:
        if old_loc is None:
            raise EngineError(f"eager update of oid {oid} needs its old location")
        with self._lock.gen_wlock():
            self._check_open()
            ts = self._clock.next()
            self._remove_old(oid, old_loc)
            self._tree.insert(ObjectRecord(new_loc, oid, ts))
            self._maybe_flush_locked()
        return ts

    def _remove_old(self, oid: ObjectId, old_loc: Location) -> None:
        if self._tree.remove_exact(old_loc, oid):
            self.memory_removals += 1
        self._deleted.add(oid)

    # --- flush / merge --------------------------------------------------

    def _write_deleted(self, component: DiskComponent, keys: SortedSet) -> None:
        write_u64_array(
            self._store.path_for(component.id, DELETED_SUFFIX),
            np.fromiter(keys, dtype=np.uint64, count=len(keys)),
        )

    def _persist_flush(self, component: DiskComponent, dropped: RecordArray) -> None:
        self._write_deleted(component, self._deleted)

    def _commit_flush(self, component: DiskComponent, dropped: RecordArray) -> None:
        self._component_deleted[component.id] = self._deleted
        self._deleted = SortedSet()

    def _merge_keep(
        self, run: list[DiskComponent], records: RecordArray, source: npt.NDArray[np.int64]
    ) -> KeepMask:
        keep = np.ones(len(records), dtype=bool)
        newer = SortedSet()
        for i in range(len(run) - 1, -1, -1):
            if newer:
                rows = np.flatnonzero(source == i)
                invalid = np.isin(
                    records["oid"][rows],
                    np.fromiter(newer, dtype=np.uint64, count=len(newer)),
                )
                keep[rows[invalid]] = False
            newer |= self._component_deleted.get(run[i].id, ())
        return keep

    def _merged_deleted(self, run: list[DiskComponent]) -> SortedSet:
        merged = SortedSet()
        for old in run:
            merged |= self._component_deleted.get(old.id, ())
        return merged

    def _persist_merge(
        self, run: list[DiskComponent], component: DiskComponent, dropped: RecordArray
    ) -> None:
        self._write_deleted(component, self._merged_deleted(run))

    def _commit_merge(
        self, run: list[DiskComponent], component: DiskComponent, dropped: RecordArray
    ) -> None:
        self._component_deleted[component.id] = self._merged_deleted(run)
        for old in run:
            self._component_deleted.pop(old.id, None)

    def deleted_keys(self, component: DiskComponent) -> npt.NDArray[np.uint64]:
        return read_u64_array(self._store.path_for(component.id, DELETED_SUFFIX))

    # --- reads ----------------------------------------------------------

    def _select(self, sources: list[list[ObjectRecord]]) -> list[ObjectRecord]:
        # sources[-1] is memory; its own deleted set only covers older components
        newer_sets: list[SortedSet] = [self._deleted]
        results = list(sources[-1])
        for component, candidates in zip(
            reversed(self._components), reversed(sources[:-1])
        ):
            results.extend(
                rec
                for rec in candidates
                if not any(rec.oid in deleted for deleted in newer_sets)
            )
            newer_sets.append(self._component_deleted.get(component.id, SortedSet()))
        return results
