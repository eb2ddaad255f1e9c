from .generate_workload import GenerateWorkload, GenerateWorkloadError
from .run_ingest import IngestResult, RunBenchError, RunIngest
from .run_mixed import RunMixed, VerificationError
from .run_queries import QueryRunResult, RunQueries

__all__ = [
    "GenerateWorkload",
    "GenerateWorkloadError",
    "IngestResult",
    "QueryRunResult",
    "RunBenchError",
    "RunIngest",
    "RunMixed",
    "RunQueries",
    "VerificationError",
]
