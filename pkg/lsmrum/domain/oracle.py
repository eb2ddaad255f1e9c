from typing import Iterable

from .core import Location, ObjectId, ObjectRecord, OpKind, Rect, WorkloadOp

ResultKey = tuple[int, float, float]


class ReplayOracle:
    """Brute-force reference: the latest location of every live oid.

    Raw double inserts of one oid collapse to the last location here, while
    the indexes keep both copies; workloads used for verification never
    insert a live oid twice.
    """

    def __init__(self) -> None:
        self._live: dict[ObjectId, Location] = {}

    def apply(self, op: WorkloadOp) -> None:
        if op.kind is OpKind.QUERY:
            return
        assert op.oid is not None
        if op.kind is OpKind.DELETE:
            self._live.pop(op.oid, None)
        else:
            assert op.loc is not None
            self._live[op.oid] = op.loc

    def apply_all(self, ops: Iterable[WorkloadOp]) -> None:
        for op in ops:
            self.apply(op)

    def query(self, window: Rect) -> set[ResultKey]:
        return {
            (oid, loc.x, loc.y)
            for oid, loc in self._live.items()
            if window.contains_point(loc)
        }


def result_keys(records: Iterable[ObjectRecord]) -> set[ResultKey]:
    return {rec.key for rec in records}
