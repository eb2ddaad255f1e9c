"""CSV workload traces.

One header row, then one op per line::

    op,oid,x,y,old_x,old_y,qx1,qy1,qx2,qy2
    I,7,12.5,40.25,,,,,,
    U,7,12.75,40.5,12.5,40.25,,,,
    D,7,,,12.75,40.5,,,,
    Q,,,,,,10.0,40.0,13.0,41.0

``old_x``/``old_y`` are optional and only read by the eager baseline.
Floats are written with ``repr`` so a trace round-trips exactly.
"""

import csv
from pathlib import Path
from typing import Iterable

from ..domain.contracts.workload import TraceFormatError, TraceStoreContract
from ..domain.core import Location, ObjectId, OpKind, Rect, WorkloadOp

COLUMNS = ("op", "oid", "x", "y", "old_x", "old_y", "qx1", "qy1", "qx2", "qy2")

_U64_MAX = (1 << 64) - 1


def _fmt(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(int(value))


def format_op(op: WorkloadOp) -> list[str]:
    row = [op.kind.value, _fmt(op.oid)]
    row += [_fmt(op.loc.x), _fmt(op.loc.y)] if op.loc else ["", ""]
    row += [_fmt(op.old_loc.x), _fmt(op.old_loc.y)] if op.old_loc else ["", ""]
    if op.window:
        w = op.window
        row += [_fmt(w.min.x), _fmt(w.min.y), _fmt(w.max.x), _fmt(w.max.y)]
    else:
        row += ["", "", "", ""]
    return row


class CsvTraceStore(TraceStoreContract):
    def write(self, path: Path, ops: Iterable[WorkloadOp]) -> int:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        count = 0
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(COLUMNS)
            for op in ops:
                writer.writerow(format_op(op))
                count += 1
        return count

    def read(self, path: Path) -> list[WorkloadOp]:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Trace not found: {path}")

        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None:
                raise TraceFormatError("empty trace, header row required", 1)
            columns = [c.strip() for c in header]
            missing = [c for c in COLUMNS if c not in columns]
            if missing:
                raise TraceFormatError(
                    f"header is missing column(s): {', '.join(missing)}", 1
                )
            index = {name: columns.index(name) for name in COLUMNS}

            ops = []
            for row in reader:
                if not row or all(not cell.strip() for cell in row):
                    continue
                fields = {
                    name: row[i].strip() if i < len(row) else ""
                    for name, i in index.items()
                }
                ops.append(self._parse(fields, reader.line_num))
        return ops

    def _parse(self, row: dict[str, str], line: int) -> WorkloadOp:
        try:
            kind = OpKind(row["op"].upper())
        except ValueError:
            raise TraceFormatError(
                f"unknown op '{row['op']}', expected one of I, D, U, Q", line
            ) from None

        try:
            if kind is OpKind.QUERY:
                if row["oid"]:
                    raise ValueError("query rows must leave oid empty")
                window = Rect.of(
                    *(self._number(row, c) for c in ("qx1", "qy1", "qx2", "qy2"))
                )
                return WorkloadOp(kind, window=window)

            oid = self._oid(row["oid"])
            loc = self._location(row, "x", "y", required=kind is not OpKind.DELETE)
            old_loc = self._location(row, "old_x", "old_y", required=False)
            return WorkloadOp(kind, oid=oid, loc=loc, old_loc=old_loc)
        except ValueError as e:
            raise TraceFormatError(str(e), line) from e

    def _oid(self, text: str) -> ObjectId:
        if not text:
            raise ValueError("oid is required")
        value = int(text)
        if not 0 <= value <= _U64_MAX:
            raise ValueError(f"oid {value} out of range")
        return ObjectId(value)

    def _number(self, row: dict[str, str], column: str) -> float:
        if not row[column]:
            raise ValueError(f"column '{column}' is required")
        try:
            return float(row[column])
        except ValueError:
            raise ValueError(f"column '{column}' is not a number: '{row[column]}'") from None

    def _location(
        self, row: dict[str, str], x: str, y: str, required: bool
    ) -> Location | None:
        if not row[x] and not row[y]:
            if required:
                raise ValueError(f"columns '{x}' and '{y}' are required")
            return None
        return Location(self._number(row, x), self._number(row, y))
