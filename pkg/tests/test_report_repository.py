import csv
import json

import pytest

from lsmrum.domain.contracts.results import (
    BenchReport,
    LatencyStats,
    ReportFormat,
    SignificanceResult,
)
from lsmrum.infrastructure.file_report_repository import (
    FileReportRepository,
    FileReportRepositoryError,
    report_format,
)

REPORTS = [
    BenchReport(
        strategy="um_fmbv",
        workload="moving",
        ops=2000,
        updates=1800,
        queries=200,
        update_seconds=0.75,
        throughput_ops_per_ms=2.4,
        flush_count=12,
        merge_count=3,
        um_size_max=87,
        um_size_now=40,
        component_count=4,
        phase_update_seconds=[0.25, 0.5],
        decile_query_ms=[0.1 * i for i in range(1, 11)],
        query_latency=[LatencyStats("0.0001", 100, 0.3, 0.05, 0.29, 0.31)],
    ),
    BenchReport(strategy="eager", workload="moving", ops=2000, flush_count=20),
]

SIGNIFICANCE = [
    SignificanceResult("0.0001", "eager", "um_fmbv", 0.9, 0.3, 12.5, 0.001, True, "um_fmbv"),
]


def test_report_format_should_follow_suffix_unless_given():
    assert report_format("out/run.JSON") is ReportFormat.JSON
    assert report_format("out/run.txt", ReportFormat.CSV) is ReportFormat.CSV


def test_report_format_should_raise_when_suffix_unknown():
    with pytest.raises(FileReportRepositoryError) as exc_info:
        report_format("out/run.txt")

    assert "json, csv, md" in str(exc_info.value)


def test_json_and_csv_should_share_metric_names(tmp_path):
    repo = FileReportRepository()
    json_path = repo.save(tmp_path / "run.json", REPORTS)
    csv_path = repo.save(tmp_path / "run.csv", REPORTS)

    with open(json_path) as f:
        json_metrics = {e["strategy"]: set(e["metrics"]) for e in json.load(f)["reports"]}
    csv_metrics: dict[str, set[str]] = {}
    with open(csv_path, newline="") as f:
        for row in csv.DictReader(f):
            csv_metrics.setdefault(row["strategy"], set()).add(row["metric"])

    assert json_metrics == csv_metrics
    assert "clean_removals.vacuum" in json_metrics["eager"]
    assert "query.0.0001.mean_ms" in json_metrics["um_fmbv"]


@pytest.mark.parametrize("suffix", ["json", "csv", "md"])
def test_load_should_restore_saved_reports(tmp_path, suffix):
    repo = FileReportRepository()
    path = repo.save(tmp_path / f"run.{suffix}", REPORTS, significance=SIGNIFICANCE)

    assert repo.load(path) == REPORTS


@pytest.mark.parametrize("suffix", ["json", "md"])
def test_load_significance_should_restore_saved_results(tmp_path, suffix):
    repo = FileReportRepository()
    path = repo.save(tmp_path / f"run.{suffix}", REPORTS, significance=SIGNIFICANCE)

    assert repo.load_significance(path) == SIGNIFICANCE


def test_load_significance_should_be_empty_for_csv(tmp_path):
    repo = FileReportRepository()
    path = repo.save(tmp_path / "run.csv", REPORTS, significance=SIGNIFICANCE)

    assert repo.load_significance(path) == []


def test_markdown_report_should_render_summary_body(tmp_path):
    path = FileReportRepository().save(tmp_path / "run.md", REPORTS, significance=SIGNIFICANCE)

    text = path.read_text()

    assert "# Benchmark summary" in text
    assert "## um_fmbv" in text
    assert "| flush_count | 12 |" in text
    assert "um_fmbv is faster" in text


def test_save_should_honour_explicit_format_and_create_directories(tmp_path):
    path = FileReportRepository().save(
        tmp_path / "nested" / "run.out", REPORTS, out_format=ReportFormat.JSON
    )

    with open(path) as f:
        assert [e["strategy"] for e in json.load(f)["reports"]] == ["um_fmbv", "eager"]


def test_load_should_raise_when_report_missing(tmp_path):
    with pytest.raises(FileReportRepositoryError) as exc_info:
        FileReportRepository().load(tmp_path / "absent.json")

    assert "Report not found" in str(exc_info.value)


@pytest.mark.parametrize(
    "name, content",
    [
        ("run.json", '{"reports": [{"strategy": "um"}]}'),
        ("run.json", '{"reports": [{"strategy": "um", "metrics": {"bogus": 1}}]}'),
        ("run.json", "[1, 2]"),
        ("run.csv", "name,value\num,1\n"),
        ("run.csv", "strategy,metric,value\num,flush_count,many\n"),
    ],
)
def test_load_should_raise_when_report_malformed(tmp_path, name, content):
    path = tmp_path / name
    path.write_text(content)

    with pytest.raises(FileReportRepositoryError) as exc_info:
        FileReportRepository().load(path)

    assert "Malformed report" in str(exc_info.value)
