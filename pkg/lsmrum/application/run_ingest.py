import logging
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from ..domain.atomic import AtomicInt
from ..domain.contracts.config import EngineConfig
from ..domain.contracts.index import IndexFactory, SpatialIndexContract
from ..domain.contracts.results import BenchReport
from ..domain.contracts.workload import TraceStoreContract
from ..domain.core import OpKind, WorkloadOp

logger = logging.getLogger(__name__)

SAMPLE_EVERY = 1000
PHASES = 10


class RunBenchError(Exception):
    pass


@dataclass
class IngestResult:
    report: BenchReport
    index: SpatialIndexContract
    um_samples: list[int]


def partition(
    ops: Sequence[WorkloadOp], threads: int
) -> list[list[tuple[int, WorkloadOp]]]:
    """Split data ops by ``oid % threads``; each op keeps its trace position."""
    parts: list[list[tuple[int, WorkloadOp]]] = [[] for _ in range(threads)]
    for seq, op in enumerate(ops):
        if op.kind is OpKind.QUERY:
            continue
        assert op.oid is not None
        parts[op.oid % threads].append((seq, op))
    return parts


def make_data_dir(data_dir: Path | None, strategy: str) -> Path:
    if data_dir is None:
        return Path(tempfile.mkdtemp(prefix=f"rum-{strategy}-"))
    data_dir.mkdir(parents=True, exist_ok=True)
    return Path(tempfile.mkdtemp(prefix=f"{strategy}-", dir=data_dir))


def phase_boundaries(total: int) -> dict[int, list[int]]:
    """Map an op count to the phases (deciles) that end there."""
    boundaries: dict[int, list[int]] = {}
    for k in range(PHASES):
        boundaries.setdefault(max(1, (total * (k + 1)) // PHASES), []).append(k)
    return boundaries


def fill_report(
    report: BenchReport, index: SpatialIndexContract, um_samples: list[int]
) -> BenchReport:
    stats = index.stats()
    report.flush_count = stats.flush_count
    report.merge_count = stats.merge_count
    report.um_size_now = stats.um_size_now
    report.um_size_max = max(um_samples, default=0)
    report.component_count = stats.component_count
    report.records_scanned = stats.records_scanned
    report.pages_scanned = stats.pages_scanned
    report.clean_removals = dict(stats.clean_removals)
    return report


class RunIngest:
    """Feed the data ops of a trace to one strategy from N threads and time it.

    Parsing and engine setup happen before the clock starts. The memo size is
    sampled through ``stats()`` every ``sample_every`` ops and once at the end.
    """

    def __init__(
        self,
        trace_store: TraceStoreContract,
        index_factory: IndexFactory,
        sample_every: int = SAMPLE_EVERY,
    ) -> None:
        self._trace_store = trace_store
        self._index_factory = index_factory
        self._sample_every = sample_every

    def run(
        self,
        trace: Path,
        strategy: str,
        config: EngineConfig,
        threads: int = 1,
        data_dir: Path | None = None,
        on_progress: Callable[[int], None] | None = None,
    ) -> IngestResult:
        ops = self._trace_store.read(trace)
        return self.ingest(
            ops, strategy, config, threads, data_dir, Path(trace).stem, on_progress
        )

    def ingest(
        self,
        ops: Sequence[WorkloadOp],
        strategy: str,
        config: EngineConfig,
        threads: int = 1,
        data_dir: Path | None = None,
        workload: str = "",
        on_progress: Callable[[int], None] | None = None,
    ) -> IngestResult:
        if threads < 1:
            raise RunBenchError(f"threads must be >= 1, got {threads}")

        parts = partition(ops, threads)
        total = sum(len(p) for p in parts)
        index = self._index_factory(strategy, config, make_data_dir(data_dir, strategy))

        done = AtomicInt(0)
        samples: list[int] = []
        phase_seconds = [0.0] * PHASES
        record_lock = threading.Lock()
        boundaries = phase_boundaries(total)

        start = time.perf_counter()

        def work(part: list[tuple[int, WorkloadOp]]) -> None:
            for _, op in part:
                index.apply(op)
                n = done.increment_and_get()
                phases = boundaries.get(n)
                if phases or n % self._sample_every == 0:
                    now = time.perf_counter() - start
                    size = index.stats().um_size_now
                    with record_lock:
                        samples.append(size)
                        for k in phases or ():
                            phase_seconds[k] = now
                if on_progress is not None:
                    on_progress(1)

        if threads == 1:
            work(parts[0])
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for future in [pool.submit(work, part) for part in parts]:
                    future.result()

        elapsed = time.perf_counter() - start
        samples.append(index.stats().um_size_now)

        updates = sum(1 for op in ops if op.kind is not OpKind.QUERY)
        report = BenchReport(
            strategy=index.name,
            workload=workload,
            threads=threads,
            ops=len(ops),
            updates=updates,
            queries=len(ops) - updates,
            update_seconds=round(elapsed, 6),
            throughput_ops_per_ms=round(updates / (elapsed * 1000), 4) if elapsed > 0 else 0.0,
            phase_update_seconds=[round(s, 6) for s in phase_seconds] if total else [],
        )
        fill_report(report, index, samples)
        logger.info(
            "%s ingested %d ops on %d thread(s) in %.3fs",
            index.name,
            total,
            threads,
            elapsed,
        )
        return IngestResult(report=report, index=index, um_samples=samples)
