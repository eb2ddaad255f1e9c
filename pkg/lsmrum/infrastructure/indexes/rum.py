"""LSM R-tree with an Update Memo.

Deletes only touch the memo. Updates record the old copies as obsolete in the
memo and insert the new copy, so no index structure is ever searched on the
write path. Queries validate candidates against the memo. Obsolete copies are
removed by whichever cleaning strategies are enabled:

- F: dropped while a memory component is flushed
- M: dropped while disk components are merged
- B: per-leaf update counter cleans the touched leaf at a threshold
- V: a global update counter walks the leaves round-robin
"""

import logging
from pathlib import Path

import numpy as np
import numpy.typing as npt

from ...domain.cleaning import BufferedCleaner, VacuumCleaner
from ...domain.contracts.config import CleaningFlag, EngineConfig, format_flags
from ...domain.contracts.index import EngineStats
from ...domain.core import Location, ObjectId, ObjectRecord, Timestamp
from ...domain.update_memo import UpdateMemo
from ..storage import DiskComponent, RecordArray
from .base import KeepMask, LsmIndex

logger = logging.getLogger(__name__)


class RumIndex(LsmIndex):
    def __init__(self, config: EngineConfig, data_dir: Path, name: str | None = None) -> None:
        self.memo = UpdateMemo()
        self._buffered = (
            BufferedCleaner(config.buffered_threshold)
            if config.has(CleaningFlag.BUFFERED)
            else None
        )
        self._vacuum = (
            VacuumCleaner(config.vacuum_threshold, config.vacuum_skip_recent)
            if config.has(CleaningFlag.VACUUM)
            else None
        )
        self._updates = 0
        self._removals = {"flush": 0, "merge": 0}
        super().__init__(config, data_dir)
        flags = format_flags(config.cleaning_flags)
        self.name = name or ("um_" + flags.lower() if flags else "um")

    def _on_new_tree(self) -> None:
        if self._vacuum is not None:
            self._vacuum.attach(self._tree)

    # --- writes ---------------------------------------------------------

    def insert(self, oid: ObjectId, loc: Location) -> Timestamp:
        with self._lock.gen_wlock():
            self._check_open()
            ts = self._clock.next()
            self._tree.insert(ObjectRecord(loc, oid, ts))
            self._maybe_flush_locked()
        return ts

    def delete(self, oid: ObjectId, old_loc: Location | None = None) -> Timestamp:
        self._check_open()
        ts = self._clock.next()
        self.memo.record_obsolete(oid, ts)
        return ts

    def update(
        self, oid: ObjectId, new_loc: Location, old_loc: Location | None = None
    ) -> Timestamp:
        with self._lock.gen_wlock():
            self._check_open()
            ts = self._clock.next()
            self.memo.record_obsolete(oid, ts)
            leaf = self._tree.insert(ObjectRecord(new_loc, oid, ts))
            self._updates += 1
            if self._buffered is not None:
                self._buffered.on_update(self._tree, leaf, self.memo, self._updates)
            if self._vacuum is not None:
                self._vacuum.on_update(self.memo, self._updates)
            self._maybe_flush_locked()
        return ts

    def clean_memory(self) -> int:
        """Clean every leaf of the memory component now."""
        with self._lock.gen_wlock():
            self._check_open()
            removed = 0
            for leaf in list(self._tree.leaves()):
                removed += self._tree.clean_node(leaf, self.memo, self._updates)
            return removed

    # --- flush / merge cleaning -----------------------------------------

    def _obsolete_mask(self, records: RecordArray) -> KeepMask:
        oids = records["oid"]
        tracked = np.fromiter(self.memo.oids(), dtype=np.uint64)
        suspects = np.flatnonzero(np.isin(oids, tracked))
        mask = np.zeros(len(records), dtype=bool)
        for i in suspects.tolist():
            entry = self.memo.lookup(ObjectId(int(oids[i])))
            if entry is not None and int(records["ts"][i]) < entry[0]:
                mask[i] = True
        return mask

    def _flush_keep(self, records: RecordArray) -> KeepMask:
        if not self.config.has(CleaningFlag.FLUSH):
            return super()._flush_keep(records)
        return ~self._obsolete_mask(records)

    def _commit_flush(self, component: DiskComponent, dropped: RecordArray) -> None:
        self._settle(dropped, "flush")

    def _merge_keep(
        self, run: list[DiskComponent], records: RecordArray, source: npt.NDArray[np.int64]
    ) -> KeepMask:
        if not self.config.has(CleaningFlag.MERGE):
            return super()._merge_keep(run, records, source)
        return ~self._obsolete_mask(records)

    def _commit_merge(
        self, run: list[DiskComponent], component: DiskComponent, dropped: RecordArray
    ) -> None:
        self._settle(dropped, "merge")

    def _settle(self, dropped: RecordArray, strategy: str) -> None:
        unsettled = 0
        for oid in dropped["oid"].tolist():
            if self.memo.settle(ObjectId(oid)) is None:
                unsettled += 1
        self._removals[strategy] += len(dropped)
        if unsettled:
            logger.warning(
                "%s %s cleaning dropped %d copies the memo no longer counted",
                self.name,
                strategy,
                unsettled,
            )

    # --- reads ----------------------------------------------------------

    def _select(self, sources: list[list[ObjectRecord]]) -> list[ObjectRecord]:
        candidates = [rec for source in sources for rec in source]
        before = self.memo.anomalies.get()
        results = self.memo.validate(candidates, strict=self.config.strict_validation)
        if self.memo.anomalies.get() != before:
            logger.debug(
                "%s kept %d candidates newer than their memo entry",
                self.name,
                self.memo.anomalies.get() - before,
            )
        return results

    def _stats_locked(self) -> EngineStats:
        stats = super()._stats_locked()
        stats.um_size_now = self.memo.size()
        stats.um_size_max = self.memo.max_size()
        stats.validation_anomalies = self.memo.anomalies.get()
        stats.unsettled_drops = self.memo.unsettled.get()
        stats.clean_removals = {
            "flush": self._removals["flush"],
            "merge": self._removals["merge"],
            "buffered": self._buffered.removed if self._buffered else 0,
            "vacuum": self._vacuum.removed if self._vacuum else 0,
        }
        return stats
