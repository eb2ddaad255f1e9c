from .core import Location, ObjectId, ObjectRecord, OpKind, Rect, Timestamp, WorkloadOp
from .statistics import (
    calculate_confidence_interval,
    compare_strategies_significance,
    summarize_latencies,
    welch_t_test,
)

__all__ = [
    "Location",
    "ObjectId",
    "ObjectRecord",
    "OpKind",
    "Rect",
    "Timestamp",
    "WorkloadOp",
    "calculate_confidence_interval",
    "compare_strategies_significance",
    "summarize_latencies",
    "welch_t_test",
]
