import pytest

from lsmrum.domain.contracts.workload import TraceFormatError
from lsmrum.domain.core import Location, ObjectId, OpKind, Rect, WorkloadOp
from lsmrum.infrastructure.trace_file import COLUMNS, CsvTraceStore, format_op

HEADER = ",".join(COLUMNS) + "\n"

OPS = [
    WorkloadOp(OpKind.INSERT, oid=ObjectId(7), loc=Location(12.5, 40.25)),
    WorkloadOp(
        OpKind.UPDATE,
        oid=ObjectId(7),
        loc=Location(0.1 + 0.2, -33.333333333333336),
        old_loc=Location(12.5, 40.25),
    ),
    WorkloadOp(OpKind.DELETE, oid=ObjectId(7), old_loc=Location(0.1 + 0.2, -33.333333333333336)),
    WorkloadOp(OpKind.QUERY, window=Rect.of(10.0, 40.0, 13.0, 41.0)),
]


def _trace(tmp_path, body: str):
    path = tmp_path / "trace.csv"
    path.write_text(HEADER + body)
    return path


def test_format_op_should_leave_unused_columns_empty():
    assert format_op(OPS[0]) == ["I", "7", "12.5", "40.25", "", "", "", "", "", ""]
    assert format_op(OPS[3]) == ["Q", "", "", "", "", "", "10.0", "40.0", "13.0", "41.0"]


def test_write_should_create_parent_directory_and_count_ops(tmp_path):
    path = tmp_path / "traces" / "moving.csv"

    assert CsvTraceStore().write(path, OPS) == 4
    assert path.read_text().splitlines()[0] == ",".join(COLUMNS)


def test_read_should_restore_written_ops_exactly(tmp_path):
    store = CsvTraceStore()
    path = tmp_path / "trace.csv"
    store.write(path, OPS)

    assert store.read(path) == OPS


def test_read_should_accept_delete_without_old_location_and_skip_blank_rows(tmp_path):
    path = _trace(tmp_path, "I,1,1.0,2.0,,,,,,\n\nD,1,,,,,,,,\n")

    ops = CsvTraceStore().read(path)

    assert [op.kind for op in ops] == [OpKind.INSERT, OpKind.DELETE]
    assert ops[1].old_loc is None


def test_read_should_accept_reordered_columns(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("oid,op,x,y,old_x,old_y,qx1,qy1,qx2,qy2\n3,i,1.5,2.5,,,,,,\n")

    assert CsvTraceStore().read(path) == [
        WorkloadOp(OpKind.INSERT, oid=ObjectId(3), loc=Location(1.5, 2.5))
    ]


def test_read_should_raise_when_file_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        CsvTraceStore().read(tmp_path / "absent.csv")


def test_read_should_raise_when_file_empty(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("")

    with pytest.raises(TraceFormatError) as exc_info:
        CsvTraceStore().read(path)

    assert exc_info.value.line == 1


def test_read_should_raise_when_header_lacks_columns(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("op,oid,x,y\nI,1,1.0,1.0\n")

    with pytest.raises(TraceFormatError) as exc_info:
        CsvTraceStore().read(path)

    assert "old_x" in str(exc_info.value)
    assert exc_info.value.line == 1


@pytest.mark.parametrize(
    "row, message",
    [
        ("X,1,1.0,1.0,,,,,,", "unknown op 'X'"),
        ("I,,1.0,1.0,,,,,,", "oid is required"),
        ("I,-1,1.0,1.0,,,,,,", "out of range"),
        ("I,18446744073709551616,1.0,1.0,,,,,,", "out of range"),
        ("I,1,abc,1.0,,,,,,", "not a number"),
        ("U,1,,,,,,,,", "are required"),
        ("I,1,1.0,,,,,,,", "column 'y' is required"),
        ("I,1,nan,1.0,,,,,,", "finite"),
        ("Q,4,,,,,1.0,1.0,2.0,2.0", "leave oid empty"),
        ("Q,,,,,,2.0,1.0,1.0,2.0", "Inverted"),
        ("Q,,,,,,1.0,1.0,2.0,", "column 'qy2' is required"),
    ],
)
def test_read_should_report_line_when_row_invalid(tmp_path, row, message):
    path = _trace(tmp_path, "I,1,1.0,1.0,,,,,,\n" + row + "\n")

    with pytest.raises(TraceFormatError) as exc_info:
        CsvTraceStore().read(path)

    assert exc_info.value.line == 3
    assert str(exc_info.value).startswith("line 3: ")
    assert message in str(exc_info.value)
