import csv
import json
from dataclasses import asdict
from pathlib import Path
from typing import Any

import frontmatter

from ..domain.contracts.results import (
    BenchReport,
    MetricValue,
    ReportFormat,
    ReportRepositoryContract,
    SignificanceResult,
)
from .templates import render_summary

CSV_COLUMNS = ("strategy", "metric", "value")


class FileReportRepositoryError(Exception):
    pass


def report_format(path: Path, out_format: ReportFormat | None = None) -> ReportFormat:
    if out_format is not None:
        return out_format
    suffix = Path(path).suffix.lstrip(".").lower()
    try:
        return ReportFormat(suffix)
    except ValueError:
        raise FileReportRepositoryError(
            f"Cannot infer report format from '{path}'. "
            f"Use one of: {', '.join(f.value for f in ReportFormat)}"
        ) from None


def _csv_value(value: MetricValue) -> str:
    return repr(value) if isinstance(value, float) else str(value)


class FileReportRepository(ReportRepositoryContract):
    def save(
        self,
        path: Path,
        reports: list[BenchReport],
        significance: list[SignificanceResult] | None = None,
        out_format: ReportFormat | None = None,
    ) -> Path:
        path = Path(path)
        fmt = report_format(path, out_format)
        path.parent.mkdir(parents=True, exist_ok=True)

        entries = [
            {"strategy": r.strategy, "metrics": r.to_metrics()} for r in reports
        ]
        sig = [asdict(s) for s in significance or []]

        if fmt is ReportFormat.JSON:
            with open(path, "w") as f:
                json.dump({"reports": entries, "significance": sig}, f, indent=2)
        elif fmt is ReportFormat.CSV:
            with open(path, "w", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(CSV_COLUMNS)
                for entry in entries:
                    for metric, value in entry["metrics"].items():
                        writer.writerow([entry["strategy"], metric, _csv_value(value)])
        else:
            post = frontmatter.Post(
                render_summary(entries, sig),
                strategies=[r.strategy for r in reports],
                reports=entries,
                significance=sig,
            )
            with open(path, "w") as f:
                f.write(frontmatter.dumps(post))

        return path

    def load(self, path: Path) -> list[BenchReport]:
        path = Path(path)
        fmt = report_format(path)
        if not path.exists():
            raise FileReportRepositoryError(f"Report not found: {path}")

        try:
            if fmt is ReportFormat.CSV:
                return self._load_csv(path)
            entries = self._structured(path, fmt)["reports"]
            return [BenchReport.from_metrics(e["strategy"], e["metrics"]) for e in entries]
        except (KeyError, TypeError, ValueError) as e:
            raise FileReportRepositoryError(f"Malformed report {path}: {e}") from e

    def load_significance(self, path: Path) -> list[SignificanceResult]:
        path = Path(path)
        fmt = report_format(path)
        if fmt is ReportFormat.CSV or not path.exists():
            return []
        try:
            data = self._structured(path, fmt)
            return [SignificanceResult(**s) for s in data.get("significance") or []]
        except (TypeError, ValueError) as e:
            raise FileReportRepositoryError(f"Malformed report {path}: {e}") from e

    def _structured(self, path: Path, fmt: ReportFormat) -> dict[str, Any]:
        if fmt is ReportFormat.JSON:
            with open(path) as f:
                data = json.load(f)
        else:
            data = dict(frontmatter.load(path).metadata)
        if not isinstance(data, dict):
            raise FileReportRepositoryError(f"Malformed report {path}: expected an object")
        return data

    def _load_csv(self, path: Path) -> list[BenchReport]:
        grouped: dict[str, dict[str, MetricValue]] = {}
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
                raise FileReportRepositoryError(
                    f"Malformed report {path}: header must be {','.join(CSV_COLUMNS)}"
                )
            for row in reader:
                grouped.setdefault(row["strategy"], {})[row["metric"]] = row["value"]
        return [BenchReport.from_metrics(s, m) for s, m in grouped.items()]
