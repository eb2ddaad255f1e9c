import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..domain.contracts.config import EngineConfig
from ..domain.contracts.results import BenchReport, SignificanceResult
from ..domain.core import Location, Rect, WorkloadOp
from ..domain.statistics import compare_strategies_significance, summarize_latencies
from .run_ingest import RunIngest

logger = logging.getLogger(__name__)

# fractions of the world box covered by one query window
SELECTIVITY_LADDER = (0.0001, 0.0007, 0.0041, 0.0156, 0.0467, 0.1176)


@dataclass
class QueryRunResult:
    reports: list[BenchReport] = field(default_factory=list)
    significance: list[SignificanceResult] = field(default_factory=list)


def selectivity_label(selectivity: float) -> str:
    return f"{selectivity:g}"


def random_windows(
    config: EngineConfig, selectivity: float, n_queries: int, seed: int
) -> list[Rect]:
    """Square windows of the given area fraction, fully inside the world box."""
    rng = np.random.default_rng(seed)
    min_x, min_y, max_x, max_y = config.world
    area = selectivity * (max_x - min_x) * (max_y - min_y)
    half = min(np.sqrt(area) / 2, (max_x - min_x) / 2, (max_y - min_y) / 2)
    xs = rng.uniform(min_x + half, max_x - half, n_queries).tolist()
    ys = rng.uniform(min_y + half, max_y - half, n_queries).tolist()
    return [Rect.from_center(Location(x, y), area) for x, y in zip(xs, ys)]


class RunQueries:
    """Ingest a trace into each strategy, then time random windows per selectivity.

    Every strategy answers the same windows; latencies are summarised per
    selectivity and compared pairwise with Welch's t-test.
    """

    def __init__(self, ingest: RunIngest) -> None:
        self._ingest = ingest

    def run(
        self,
        ops: Sequence[WorkloadOp],
        strategies: Sequence[str],
        config: EngineConfig,
        selectivities: Sequence[float] = SELECTIVITY_LADDER,
        n_queries: int = 100,
        seed: int = 0,
        data_dir: Path | None = None,
        workload: str = "",
        on_progress: Callable[[int], None] | None = None,
    ) -> QueryRunResult:
        windows = {
            s: random_windows(config, s, n_queries, seed + i)
            for i, s in enumerate(selectivities)
        }
        samples: dict[float, list[tuple[str, list[float]]]] = {
            s: [] for s in selectivities
        }
        result = QueryRunResult()

        for strategy in strategies:
            ingested = self._ingest.ingest(
                ops, strategy, config, data_dir=data_dir, workload=workload
            )
            index = ingested.index
            report = ingested.report
            for s in selectivities:
                latencies = []
                for window in windows[s]:
                    started = time.perf_counter()
                    index.range_query(window)
                    latencies.append((time.perf_counter() - started) * 1000)
                    if on_progress is not None:
                        on_progress(1)
                report.query_latency.append(
                    summarize_latencies(selectivity_label(s), latencies)
                )
                samples[s].append((report.strategy, latencies))
            report.queries = n_queries * len(selectivities)
            stats = index.stats()
            report.records_scanned = stats.records_scanned
            report.pages_scanned = stats.pages_scanned
            index.close()
            result.reports.append(report)
            logger.info("%s answered %d windows", report.strategy, report.queries)

        for s in selectivities:
            result.significance.extend(
                compare_strategies_significance(selectivity_label(s), samples[s])
            )
        return result
