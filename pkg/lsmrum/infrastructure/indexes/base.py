"""Shared LSM lifecycle: memory R-tree, flush, prefix merge, component scans.

Subclasses decide what a delete writes, which records flush and merge may
drop, and how query candidates are validated.
"""

import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Callable

import numpy as np
import numpy.typing as npt
from readerwriterlock import rwlock

from ...domain.atomic import AtomicInt
from ...domain.contracts.config import EngineConfig
from ...domain.contracts.index import EngineStats, SpatialIndexContract
from ...domain.core import ObjectRecord, Rect, TimestampCounter
from ...domain.rtree import Rtree
from ..storage import (
    ComponentStore,
    DiskComponent,
    RecordArray,
    StorageError,
    array_to_records,
    records_to_array,
)
from .merge_policy import PrefixMergePolicy

logger = logging.getLogger(__name__)

KeepMask = npt.NDArray[np.bool_]


class EngineError(Exception):
    pass


class LsmIndex(SpatialIndexContract, ABC):
    name = "lsm"
    sidecars: tuple[str, ...] = ()

    def __init__(self, config: EngineConfig, data_dir: Path) -> None:
        self.config = config
        self.data_dir = Path(data_dir)
        self._store = ComponentStore(self.data_dir, config.curve, config.world)
        self._policy = PrefixMergePolicy(
            config.merge_threshold, config.max_mergeable_bytes
        )
        self._lock = rwlock.RWLockWrite()
        self._clock = TimestampCounter()
        self._components: list[DiskComponent] = []  # oldest first
        self._flush_count = 0
        self._merge_count = 0
        self._records_scanned = AtomicInt(0)
        self._pages_scanned = AtomicInt(0)
        self._closed = False
        self._tree = Rtree(config.node_capacity)
        self._on_new_tree()

    # --- hooks ----------------------------------------------------------

    def _on_new_tree(self) -> None:
        pass

    def _has_unflushed_state(self) -> bool:
        return self._tree.size > 0

    def _flush_keep(self, records: RecordArray) -> KeepMask:
        return np.ones(len(records), dtype=bool)

    # persist hooks write sidecars and may raise; commit hooks only run once
    # every file of the new component is on disk and must not fail.

    def _persist_flush(self, component: DiskComponent, dropped: RecordArray) -> None:
        pass

    def _commit_flush(self, component: DiskComponent, dropped: RecordArray) -> None:
        pass

    def _merge_keep(
        self, run: list[DiskComponent], records: RecordArray, source: npt.NDArray[np.int64]
    ) -> KeepMask:
        return np.ones(len(records), dtype=bool)

    def _persist_merge(
        self, run: list[DiskComponent], component: DiskComponent, dropped: RecordArray
    ) -> None:
        pass

    def _commit_merge(
        self, run: list[DiskComponent], component: DiskComponent, dropped: RecordArray
    ) -> None:
        pass

    @abstractmethod
    def _select(self, sources: list[list[ObjectRecord]]) -> list[ObjectRecord]:
        """Validate candidates grouped by source, oldest component first, memory last."""

    # --- lifecycle ------------------------------------------------------

    def _check_open(self) -> None:
        if self._closed:
            raise EngineError(f"{self.name} index is closed")

    def _memory_full(self) -> bool:
        estimate = self._tree.size * self.config.record_bytes_estimate
        return estimate > self.config.memory_budget_bytes

    def _maybe_flush_locked(self) -> None:
        if self._memory_full():
            self._flush_locked()
            self._maybe_merge_locked()

    def flush(self) -> DiskComponent:
        with self._lock.gen_wlock():
            self._check_open()
            if not self._has_unflushed_state():
                raise EngineError("Nothing to flush: memory component is empty")
            component = self._flush_locked()
            self._maybe_merge_locked()
            return component

    def force_flush(self) -> None:
        with self._lock.gen_wlock():
            self._check_open()
            if self._has_unflushed_state():
                self._flush_locked()
                self._maybe_merge_locked()

    def maybe_merge(self) -> DiskComponent | None:
        with self._lock.gen_wlock():
            self._check_open()
            return self._maybe_merge_locked()

    def force_merge(self) -> None:
        with self._lock.gen_wlock():
            self._check_open()
            if self._components:
                self._merge_locked(list(self._components))

    def _flush_locked(self) -> DiskComponent:
        records, keys = self._store.sort(records_to_array(self._tree.all_records()))
        keep = self._flush_keep(records)
        dropped = records[~keep]
        try:
            component = self._store.write(records[keep], keys[keep])
            self._persist_or_discard(component, lambda: self._persist_flush(component, dropped))
        except StorageError as e:
            raise EngineError(f"Flush failed, memory component kept: {e}") from e
        self._commit_flush(component, dropped)
        self._components.append(component)
        self._tree = Rtree(self.config.node_capacity)
        self._on_new_tree()
        self._flush_count += 1
        logger.info(
            "%s flushed component %d: %d records, %d dropped",
            self.name,
            component.id,
            component.record_count,
            len(dropped),
        )
        return component

    def _persist_or_discard(self, component: DiskComponent, persist: Callable[[], None]) -> None:
        try:
            persist()
        except StorageError:
            self._store.remove(component, *self.sidecars)
            raise

    def _maybe_merge_locked(self) -> DiskComponent | None:
        run = self._policy.select(self._components)
        if run is None:
            return None
        return self._merge_locked(run)

    def _merge_locked(self, run: list[DiskComponent]) -> DiskComponent:
        records: RecordArray = np.concatenate([c.records for c in run])
        keys = np.concatenate([c.keys for c in run])
        source = np.concatenate(
            [np.full(len(c.records), i, dtype=np.int64) for i, c in enumerate(run)]
        )
        keep = self._merge_keep(run, records, source)
        dropped = records[~keep]
        records, keys = records[keep], keys[keep]
        order = np.argsort(keys, kind="stable")
        try:
            component = self._store.write(records[order], keys[order])
            self._persist_or_discard(
                component, lambda: self._persist_merge(run, component, dropped)
            )
        except StorageError as e:
            raise EngineError(f"Merge failed, inputs kept: {e}") from e

        self._commit_merge(run, component, dropped)
        position = self._components.index(run[0])
        retired = {c.id for c in run}
        survivors = [c for c in self._components if c.id not in retired]
        survivors.insert(position, component)
        self._components = survivors
        for old in run:
            self._store.remove(old, *self.sidecars)
        self._merge_count += 1
        logger.info(
            "%s merged %d components into %d: %d records, %d dropped",
            self.name,
            len(run),
            component.id,
            component.record_count,
            len(dropped),
        )
        return component

    def close(self) -> None:
        with self._lock.gen_wlock():
            self._closed = True
        logger.debug("%s closed with %d components", self.name, len(self._components))

    # --- reads ----------------------------------------------------------

    def _gather(self, window: Rect) -> list[list[ObjectRecord]]:
        sources = []
        for component in self._components:
            if component.record_count == 0:
                sources.append([])
                continue
            result = component.prune_scan(window, self.config.page_size_bytes)
            self._records_scanned.add_and_get(result.scanned)
            self._pages_scanned.add_and_get(result.pages)
            sources.append(result.records)
        sources.append(self._tree.range_search(window))
        return sources

    def range_query(self, window: Rect) -> list[ObjectRecord]:
        with self._lock.gen_rlock():
            self._check_open()
            return self._select(self._gather(window))

    def candidates(self, window: Rect) -> list[ObjectRecord]:
        """Unvalidated candidates from every component, memory last."""
        with self._lock.gen_rlock():
            return [rec for source in self._gather(window) for rec in source]

    def scan_all(self) -> list[ObjectRecord]:
        with self._lock.gen_rlock():
            records = []
            for component in self._components:
                records.extend(array_to_records(component.records))
            records.extend(self._tree.all_records())
            return records

    def components(self) -> list[DiskComponent]:
        with self._lock.gen_rlock():
            return list(self._components)

    @property
    def memory_tree(self) -> Rtree:
        return self._tree

    def stats(self) -> EngineStats:
        with self._lock.gen_rlock():
            return self._stats_locked()

    def _stats_locked(self) -> EngineStats:
        return EngineStats(
            flush_count=self._flush_count,
            merge_count=self._merge_count,
            component_count=len(self._components),
            component_records=[c.record_count for c in self._components],
            memory_records=self._tree.size,
            records_scanned=self._records_scanned.get(),
            pages_scanned=self._pages_scanned.get(),
        )
