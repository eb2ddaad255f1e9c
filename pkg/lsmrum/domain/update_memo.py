"""The Update Memo: oid -> (freshest timestamp, obsolete-copy count).

Deletes and updates never touch the index trees; they only record here that
older copies of an object are obsolete. Queries validate candidates against
the memo, and every cleaning strategy decrements the count as it physically
drops obsolete copies. An entry disappears once its count reaches zero.

Concurrency follows the compare-and-if-less-then-swap protocol: ``ts`` only
moves forward through CILS, ``cnt`` moves through atomic increments and
decrements, and entry creation/removal are atomic per stripe of the map.
"""

from dataclasses import dataclass
from threading import Lock
from typing import Iterable

from .atomic import AtomicInt
from .core import ObjectId, ObjectRecord, Timestamp


DEFAULT_STRIPES = 64


class UpdateMemoError(Exception):
    pass


class UpdateMemoInvariantError(UpdateMemoError):
    pass


class UMEntry:
    __slots__ = ("ts", "cnt")

    def __init__(self, ts: Timestamp, cnt: int = 1) -> None:
        self.ts = AtomicInt(ts)
        # Signed: a racing clean may observe a transient 0 before removal resolves.
        self.cnt = AtomicInt(cnt)

    def __repr__(self) -> str:
        return f"UMEntry(ts={self.ts.get()}, cnt={self.cnt.get()})"


@dataclass(frozen=True)
class MemoRow:
    oid: ObjectId
    ts: Timestamp
    cnt: int


class UpdateMemo:
    def __init__(self, stripes: int = DEFAULT_STRIPES) -> None:
        if stripes <= 0 or (stripes & (stripes - 1)) != 0:
            raise ValueError("stripes must be a positive power of 2")
        self._mask = stripes - 1
        self._maps: list[dict[ObjectId, UMEntry]] = [{} for _ in range(stripes)]
        self._locks = [Lock() for _ in range(stripes)]
        self._size = AtomicInt(0)
        self._max_size = AtomicInt(0)
        self.cils_retries = AtomicInt(0)
        self.anomalies = AtomicInt(0)
        # dropped copies that found no count left to decrement
        self.unsettled = AtomicInt(0)

    # --- map primitives -------------------------------------------------

    def _stripe(self, oid: ObjectId) -> int:
        return hash(oid) & self._mask

    def _get(self, oid: ObjectId) -> UMEntry | None:
        # a single dict lookup is atomic; writers still take the stripe lock
        return self._maps[self._stripe(oid)].get(oid)

    def _put_if_absent(self, oid: ObjectId, ts: Timestamp) -> UMEntry | None:
        """Install <ts, 1> unless present; returns the existing entry or None."""
        idx = self._stripe(oid)
        with self._locks[idx]:
            existing = self._maps[idx].get(oid)
            if existing is not None:
                return existing
            self._maps[idx][oid] = UMEntry(ts, 1)
        self._max_size.update_max(self._size.increment_and_get())
        return None

    def _cils_entry(self, entry: UMEntry, val: Timestamp) -> Timestamp:
        while True:
            curr = entry.ts.get()
            if curr >= val:
                return Timestamp(curr)
            if entry.ts.compare_and_set(curr, val):
                return val
            self.cils_retries.increment_and_get()

    def _reinstate_or_increment(self, oid: ObjectId, curr: Timestamp) -> None:
        # putIfAbsent(oid, (curr, 1)) and the increment share the stripe lock
        # that _remove_if_zero takes.
        idx = self._stripe(oid)
        with self._locks[idx]:
            entry = self._maps[idx].get(oid)
            if entry is None:
                self._maps[idx][oid] = UMEntry(curr, 1)
                created = True
            else:
                self._cils_entry(entry, curr)
                entry.cnt.increment_and_get()
                created = False
        if created:
            self._max_size.update_max(self._size.increment_and_get())

    def _remove_if_zero(self, oid: ObjectId, entry: UMEntry) -> bool:
        idx = self._stripe(oid)
        with self._locks[idx]:
            if self._maps[idx].get(oid) is entry and entry.cnt.get() == 0:
                del self._maps[idx][oid]
                removed = True
            else:
                removed = False
        if removed:
            self._size.decrement_and_get()
        return removed

    # --- protocol -------------------------------------------------------

    def cils(self, oid: ObjectId, val: Timestamp) -> Timestamp:
        entry = self._get(oid)
        if entry is None:
            raise UpdateMemoError(f"No memo entry for oid {oid}")
        return self._cils_entry(entry, val)

    def record_obsolete(self, oid: ObjectId, ts: Timestamp) -> None:
        existing = self._put_if_absent(oid, ts)
        if existing is None:
            return
        curr = self._cils_entry(existing, ts)
        self._reinstate_or_increment(oid, curr)

    def clean_one(self, oid: ObjectId) -> int:
        entry = self._get(oid)
        if entry is None:
            raise UpdateMemoError(f"clean_one on absent oid {oid}")
        remaining = entry.cnt.decrement_and_get()
        if remaining < 0:
            raise UpdateMemoInvariantError(
                f"Obsolete count for oid {oid} dropped below zero"
            )
        if remaining == 0:
            self._remove_if_zero(oid, entry)
        return remaining

    def settle(self, oid: ObjectId) -> int | None:
        """clean_one for a copy a cleaner has already decided to drop.

        Inserting a live oid again leaves more stored copies than the count
        covers. The extra drops find no entry, or a zero count, and are
        tallied in ``unsettled`` instead of raising. Returns the remaining
        count, or None for an unsettled drop.
        """
        idx = self._stripe(oid)
        with self._locks[idx]:
            entry = self._maps[idx].get(oid)
            if entry is None or entry.cnt.get() <= 0:
                remaining = None
            else:
                remaining = entry.cnt.decrement_and_get()
                if remaining == 0:
                    del self._maps[idx][oid]
        if remaining is None:
            self.unsettled.increment_and_get()
        elif remaining == 0:
            self._size.decrement_and_get()
        return remaining

    # --- validation -----------------------------------------------------

    def is_obsolete(self, rec: ObjectRecord) -> bool:
        entry = self._get(rec.oid)
        return entry is not None and rec.ts < entry.ts.get()

    def validate(
        self, candidates: Iterable[ObjectRecord], strict: bool = False
    ) -> list[ObjectRecord]:
        results = []
        for cand in candidates:
            entry = self._get(cand.oid)
            if entry is None:
                results.append(cand)
                continue
            latest = entry.ts.get()
            if cand.ts == latest:
                results.append(cand)
            elif cand.ts > latest:
                # Only reachable when an oid is inserted again after its memo entry
                # was written, which makes this candidate the freshest copy.
                if strict:
                    raise UpdateMemoInvariantError(
                        f"Candidate oid={cand.oid} ts={cand.ts} is newer than memo ts={latest}"
                    )
                self.anomalies.increment_and_get()
                results.append(cand)
        return results

    # --- inspection -----------------------------------------------------

    def lookup(self, oid: ObjectId) -> tuple[Timestamp, int] | None:
        entry = self._get(oid)
        if entry is None:
            return None
        return Timestamp(entry.ts.get()), entry.cnt.get()

    def size(self) -> int:
        return self._size.get()

    def max_size(self) -> int:
        return self._max_size.get()

    def oids(self) -> list[ObjectId]:
        result: list[ObjectId] = []
        for idx, stripe in enumerate(self._maps):
            with self._locks[idx]:
                result.extend(stripe.keys())
        return result

    def snapshot(self) -> list[MemoRow]:
        rows = []
        for idx, stripe in enumerate(self._maps):
            with self._locks[idx]:
                items = list(stripe.items())
            rows.extend(
                MemoRow(oid=oid, ts=Timestamp(e.ts.get()), cnt=e.cnt.get())
                for oid, e in items
            )
        return sorted(rows, key=lambda r: r.oid)
