from io import StringIO
from unittest.mock import patch

from rich.console import Console

from lsmrum.domain.contracts.results import BenchReport, LatencyStats, SignificanceResult
from lsmrum.infrastructure.console_display import (
    _style,
    display_generated,
    display_reports,
    display_significance,
    display_verification_diff,
)


def _capture() -> tuple[StringIO, Console]:
    buf = StringIO()
    return buf, Console(file=buf, highlight=False, markup=False, width=200)


# --- _style ---


def test_style_should_be_green_when_close_to_best():
    assert _style(10.0, 10.0) == "bold green"
    assert _style(8.0, 10.0) == "bold green"


def test_style_should_step_down_when_further_from_best():
    assert _style(7.0, 10.0) == "yellow"
    assert _style(5.0, 10.0) == "orange3"
    assert _style(1.0, 10.0) == "bold red"


def test_style_should_be_dim_when_best_is_zero():
    assert _style(0.0, 0.0) == "dim"


# --- display_reports ---


def _report(strategy: str, **kwargs) -> BenchReport:
    return BenchReport(strategy=strategy, ops=1000, updates=900, **kwargs)


def test_display_reports_should_say_so_when_empty():
    buf, test_console = _capture()

    with patch("lsmrum.infrastructure.console_display.console", test_console):
        display_reports([])

    assert "No reports" in buf.getvalue()


def test_display_reports_should_list_every_strategy():
    buf, test_console = _capture()
    reports = [
        _report("eager", throughput_ops_per_ms=12.5, flush_count=7),
        _report("um_fmbv", throughput_ops_per_ms=48.25, um_size_max=31),
    ]

    with patch("lsmrum.infrastructure.console_display.console", test_console):
        display_reports(reports, title="Ingest")

    output = buf.getvalue()
    assert "Ingest" in output
    assert "eager" in output
    assert "um_fmbv" in output
    assert "48.2" in output
    assert "Average query ms" not in output


def test_display_reports_should_show_pages_read_per_strategy():
    buf, test_console = _capture()

    with patch("lsmrum.infrastructure.console_display.console", test_console):
        display_reports([_report("validation", pages_scanned=4321)])

    output = buf.getvalue()
    assert "Pages read" in output
    assert "4321" in output


def test_display_reports_should_show_deciles_and_latency_when_present():
    buf, test_console = _capture()
    report = _report(
        "um",
        decile_query_ms=[0.5] * 10,
        query_latency=[LatencyStats("mixed", 4, 1.25, 0.5, 0.45, 2.05)],
    )

    with patch("lsmrum.infrastructure.console_display.console", test_console):
        display_reports([report])

    output = buf.getvalue()
    assert "Average query ms per decile of data processed" in output
    assert "100%" in output
    assert "Query latency: um" in output
    assert "1.250" in output


# --- display_significance ---


def test_display_significance_should_name_faster_strategy():
    buf, test_console = _capture()
    results = [
        SignificanceResult("0.0156", "validation", "um_fmbv", 9.4, 5.4, 9.8, 0.001, True, "um_fmbv"),
        SignificanceResult("0.0001", "validation", "um_fmbv", 1.0, 1.0, 0.0, 1.0, False, None),
    ]

    with patch("lsmrum.infrastructure.console_display.console", test_console):
        display_significance(results)

    output = buf.getvalue()
    assert "0.0156: um_fmbv < validation" in output
    assert "0.0001: validation ≈ um_fmbv" in output


def test_display_significance_should_print_nothing_when_empty():
    buf, test_console = _capture()

    with patch("lsmrum.infrastructure.console_display.console", test_console):
        display_significance([])

    assert buf.getvalue() == ""


# --- display_verification_diff ---


def test_verification_diff_should_cap_listed_keys():
    buf, test_console = _capture()
    missing = {(oid, float(oid), 0.0) for oid in range(15)}

    with patch("lsmrum.infrastructure.console_display.console", test_console):
        display_verification_diff("um_f", 42, missing, {(99, 1.5, 2.5)})

    output = buf.getvalue()
    assert "Verification failed: um_f" in output
    assert "op #42" in output
    assert "MISSING" in output
    assert "(15)" in output
    assert "oid 9 at (9.0, 0.0)" in output
    assert "oid 10 at" not in output
    assert "oid 99 at (1.5, 2.5)" in output
    assert "showing first 10 of each" in output


def test_display_generated_should_report_count_and_path():
    buf, test_console = _capture()

    with patch("lsmrum.infrastructure.console_display.console", test_console):
        display_generated("traces/moving.csv", 5000, "moving")

    assert "Wrote 5000 moving ops to traces/moving.csv" in buf.getvalue()
