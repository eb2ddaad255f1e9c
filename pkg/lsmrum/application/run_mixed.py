import logging
import time
from pathlib import Path
from typing import Callable, Sequence

from ..domain.contracts.config import EngineConfig
from ..domain.contracts.index import IndexFactory
from ..domain.contracts.results import BenchReport
from ..domain.contracts.workload import TraceStoreContract
from ..domain.core import OpKind, WorkloadOp
from ..domain.oracle import ReplayOracle, ResultKey, result_keys
from ..domain.statistics import summarize_latencies
from .run_ingest import (
    PHASES,
    SAMPLE_EVERY,
    IngestResult,
    fill_report,
    make_data_dir,
    phase_boundaries,
)

logger = logging.getLogger(__name__)


class VerificationError(Exception):
    def __init__(
        self,
        strategy: str,
        op_index: int,
        missing: set[ResultKey],
        extra: set[ResultKey],
    ) -> None:
        self.strategy = strategy
        self.op_index = op_index
        self.missing = missing
        self.extra = extra
        super().__init__(
            f"{strategy}: query at op {op_index} differs from the replay oracle "
            f"({len(missing)} missing, {len(extra)} extra)"
        )


class RunMixed:
    """Replay a trace with interleaved queries in trace order on one thread.

    Query latency is averaged per decile of data ops processed. With
    ``verify`` every answer is compared against a replay oracle and the first
    difference aborts the run.
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
        verify: bool = False,
        data_dir: Path | None = None,
        on_progress: Callable[[int], None] | None = None,
    ) -> IngestResult:
        ops = self._trace_store.read(trace)
        return self.replay(
            ops, strategy, config, verify, data_dir, Path(trace).stem, on_progress
        )

    def replay(
        self,
        ops: Sequence[WorkloadOp],
        strategy: str,
        config: EngineConfig,
        verify: bool = False,
        data_dir: Path | None = None,
        workload: str = "",
        on_progress: Callable[[int], None] | None = None,
    ) -> IngestResult:
        index = self._index_factory(strategy, config, make_data_dir(data_dir, strategy))
        oracle = ReplayOracle() if verify else None

        total_data = sum(1 for op in ops if op.kind is not OpKind.QUERY)
        decile_samples: list[list[float]] = [[] for _ in range(PHASES)]
        query_samples: list[float] = []
        phase_seconds = [0.0] * PHASES
        boundaries = phase_boundaries(total_data)
        um_samples: list[int] = []
        update_seconds = 0.0
        data_done = 0

        for i, op in enumerate(ops):
            if op.kind is OpKind.QUERY:
                assert op.window is not None
                started = time.perf_counter()
                results = index.range_query(op.window)
                ms = (time.perf_counter() - started) * 1000
                query_samples.append(ms)
                decile = min(PHASES - 1, data_done * PHASES // max(total_data, 1))
                decile_samples[decile].append(ms)
                if oracle is not None:
                    expected = oracle.query(op.window)
                    actual = result_keys(results)
                    if actual != expected:
                        raise VerificationError(
                            index.name, i, expected - actual, actual - expected
                        )
            else:
                started = time.perf_counter()
                index.apply(op)
                update_seconds += time.perf_counter() - started
                data_done += 1
                if oracle is not None:
                    oracle.apply(op)
                for k in boundaries.get(data_done, ()):
                    phase_seconds[k] = update_seconds
                if data_done % self._sample_every == 0:
                    um_samples.append(index.stats().um_size_now)
            if on_progress is not None:
                on_progress(1)

        um_samples.append(index.stats().um_size_now)

        report = BenchReport(
            strategy=index.name,
            workload=workload,
            threads=1,
            ops=len(ops),
            updates=total_data,
            queries=len(query_samples),
            update_seconds=round(update_seconds, 6),
            throughput_ops_per_ms=(
                round(total_data / (update_seconds * 1000), 4) if update_seconds > 0 else 0.0
            ),
            phase_update_seconds=[round(s, 6) for s in phase_seconds] if total_data else [],
            decile_query_ms=(
                [
                    round(sum(s) / len(s), 6) if s else 0.0
                    for s in decile_samples
                ]
                if query_samples
                else []
            ),
            query_latency=(
                [summarize_latencies("mixed", query_samples)] if query_samples else []
            ),
        )
        fill_report(report, index, um_samples)
        logger.info(
            "%s replayed %d ops with %d queries%s",
            index.name,
            len(ops),
            len(query_samples),
            " (verified)" if verify else "",
        )
        return IngestResult(report=report, index=index, um_samples=um_samples)
