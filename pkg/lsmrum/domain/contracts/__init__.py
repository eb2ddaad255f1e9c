from .config import CleaningFlag, ConfigLoaderContract, EngineConfig
from .index import EngineStats, SpatialIndexContract
from .results import BenchReport, ReportRepositoryContract
from .workload import TraceStoreContract, WorkloadKind, WorkloadSpec

__all__ = [
    "BenchReport",
    "CleaningFlag",
    "ConfigLoaderContract",
    "EngineConfig",
    "EngineStats",
    "ReportRepositoryContract",
    "SpatialIndexContract",
    "TraceStoreContract",
    "WorkloadKind",
    "WorkloadSpec",
]
