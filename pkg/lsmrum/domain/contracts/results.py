from abc import ABC, abstractmethod
from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

from .index import CLEANING_STRATEGIES

MetricValue = int | float | str


class ReportFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    MD = "md"


@dataclass
class LatencyStats:
    label: str
    n: int
    mean_ms: float
    stddev_ms: float
    ci_lower: float
    ci_upper: float


@dataclass
class SignificanceResult:
    label: str
    strategy1: str
    strategy2: str
    mean1: float
    mean2: float
    t_statistic: float
    p_value: float
    significant: bool
    faster: str | None


@dataclass
class BenchReport:
    strategy: str
    workload: str = ""
    threads: int = 1
    ops: int = 0
    updates: int = 0
    queries: int = 0
    update_seconds: float = 0.0
    throughput_ops_per_ms: float = 0.0
    flush_count: int = 0
    merge_count: int = 0
    um_size_max: int = 0
    um_size_now: int = 0
    component_count: int = 0
    records_scanned: int = 0
    pages_scanned: int = 0
    phase_update_seconds: list[float] = field(default_factory=list)
    decile_query_ms: list[float] = field(default_factory=list)
    clean_removals: dict[str, int] = field(
        default_factory=lambda: {name: 0 for name in CLEANING_STRATEGIES}
    )
    query_latency: list[LatencyStats] = field(default_factory=list)

    def to_metrics(self) -> dict[str, MetricValue]:
        """Flatten to one metric name per value; json and csv share these names."""
        metrics: dict[str, MetricValue] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "strategy":
                continue
            if isinstance(value, (int, float, str)):
                metrics[f.name] = value
        for i, seconds in enumerate(self.phase_update_seconds):
            metrics[f"phase_update_seconds.{i}"] = seconds
        for i, ms in enumerate(self.decile_query_ms):
            metrics[f"decile_query_ms.{i}"] = ms
        for name, count in self.clean_removals.items():
            metrics[f"clean_removals.{name}"] = count
        for stat in self.query_latency:
            for key in ("n", "mean_ms", "stddev_ms", "ci_lower", "ci_upper"):
                metrics[f"query.{stat.label}.{key}"] = getattr(stat, key)
        return metrics

    @classmethod
    def from_metrics(
        cls, strategy: str, metrics: Mapping[str, MetricValue]
    ) -> "BenchReport":
        report = cls(strategy=strategy, clean_removals={})
        scalar_types = {
            f.name: f.type for f in fields(cls) if f.type in (int, float, str)
        }
        phases: dict[int, float] = {}
        deciles: dict[int, float] = {}
        latency: dict[str, dict[str, Any]] = {}

        for name, raw in metrics.items():
            if name in scalar_types:
                kind = scalar_types[name]
                if kind is int:
                    setattr(report, name, int(float(raw)))
                elif kind is float:
                    setattr(report, name, float(raw))
                else:
                    setattr(report, name, str(raw))
            elif name.startswith("phase_update_seconds."):
                phases[int(name.rsplit(".", 1)[1])] = float(raw)
            elif name.startswith("decile_query_ms."):
                deciles[int(name.rsplit(".", 1)[1])] = float(raw)
            elif name.startswith("clean_removals."):
                report.clean_removals[name.split(".", 1)[1]] = int(float(raw))
            elif name.startswith("query."):
                label, key = name[len("query.") :].rsplit(".", 1)
                latency.setdefault(label, {})[key] = raw
            else:
                raise ValueError(f"Unknown report metric '{name}'")

        report.phase_update_seconds = [phases[i] for i in sorted(phases)]
        report.decile_query_ms = [deciles[i] for i in sorted(deciles)]
        report.query_latency = [
            LatencyStats(
                label=label,
                n=int(float(values["n"])),
                mean_ms=float(values["mean_ms"]),
                stddev_ms=float(values["stddev_ms"]),
                ci_lower=float(values["ci_lower"]),
                ci_upper=float(values["ci_upper"]),
            )
            for label, values in latency.items()
        ]
        return report


class ReportRepositoryContract(ABC):
    @abstractmethod
    def save(
        self,
        path: Path,
        reports: list[BenchReport],
        significance: list[SignificanceResult] | None = None,
    ) -> Path:
        pass

    @abstractmethod
    def load(self, path: Path) -> list[BenchReport]:
        pass
