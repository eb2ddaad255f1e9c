"""Validation baseline: timestamped R-tree entries checked against a primary-key index.

The primary-key index maps each oid to its latest timestamp, or to a deletion
marker. It lives in memory and is snapshotted beside each new component.
"""

import logging
from pathlib import Path

import numpy as np
import numpy.typing as npt
from sortedcontainers import SortedDict

from ...domain.contracts.config import EngineConfig
from ...domain.core import Location, ObjectId, ObjectRecord, Timestamp
from ..storage import DiskComponent, RecordArray, write_u64_array
from .base import KeepMask, LsmIndex

logger = logging.getLogger(__name__)

PK_SUFFIX = ".pk"


class ValidationIndex(LsmIndex):
    name = "validation"
    sidecars = (PK_SUFFIX,)

    def __init__(self, config: EngineConfig, data_dir: Path) -> None:
        self._pk: SortedDict = SortedDict()
        super().__init__(config, data_dir)

    def insert(self, oid: ObjectId, loc: Location) -> Timestamp:
        with self._lock.gen_wlock():
            self._check_open()
            ts = self._clock.next()
            self._tree.insert(ObjectRecord(loc, oid, ts))
            self._pk[oid] = (ts, False)
            self._maybe_flush_locked()
        return ts

    def delete(self, oid: ObjectId, old_loc: Location | None = None) -> Timestamp:
        with self._lock.gen_wlock():
            self._check_open()
            ts = self._clock.next()
            self._pk[oid] = (ts, True)
        return ts

    def update(
        self, oid: ObjectId, new_loc: Location, old_loc: Location | None = None
    ) -> Timestamp:
        return self.insert(oid, new_loc)

    def pk_entry(self, oid: ObjectId) -> tuple[Timestamp, bool] | None:
        with self._lock.gen_rlock():
            return self._pk.get(oid)

    def _is_current(self, oid: int, ts: int) -> bool:
        entry = self._pk.get(ObjectId(oid))
        return entry is not None and not entry[1] and entry[0] == ts

    # --- flush / merge --------------------------------------------------

    def _snapshot(self, component: DiskComponent) -> None:
        # (oid, ts, deleted) triples packed as consecutive u64 values, ascending oid
        flat = [
            value
            for oid, (ts, deleted) in self._pk.items()
            for value in (oid, ts, int(deleted))
        ]
        write_u64_array(self._store.path_for(component.id, PK_SUFFIX), flat)
        logger.debug(
            "Snapshot of %d primary keys beside component %d", len(self._pk), component.id
        )

    def _persist_flush(self, component: DiskComponent, dropped: RecordArray) -> None:
        self._snapshot(component)

    def _merge_keep(
        self, run: list[DiskComponent], records: RecordArray, source: npt.NDArray[np.int64]
    ) -> KeepMask:
        return np.fromiter(
            (
                self._is_current(oid, ts)
                for oid, ts in zip(records["oid"].tolist(), records["ts"].tolist())
            ),
            dtype=bool,
            count=len(records),
        )

    def _persist_merge(
        self, run: list[DiskComponent], component: DiskComponent, dropped: RecordArray
    ) -> None:
        self._snapshot(component)

    # --- reads ----------------------------------------------------------

    def _select(self, sources: list[list[ObjectRecord]]) -> list[ObjectRecord]:
        return [
            rec
            for source in sources
            for rec in source
            if self._is_current(rec.oid, rec.ts)
        ]
