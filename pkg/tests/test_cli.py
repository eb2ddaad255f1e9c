from io import StringIO
from unittest.mock import patch

import pytest
from rich.console import Console
from typer.testing import CliRunner

from lsmrum import __version__
from lsmrum.cli import app, run
from lsmrum.infrastructure.file_report_repository import FileReportRepository

runner = CliRunner()


@pytest.fixture
def screen():
    buf = StringIO()
    test_console = Console(file=buf, highlight=False, markup=False, width=200)
    with patch("lsmrum.infrastructure.console_display.console", test_console):
        yield buf


@pytest.fixture
def trace(tmp_path, screen):
    path = tmp_path / "moving.csv"
    result = runner.invoke(
        app,
        [
            "gen",
            "--kind", "moving",
            "--ops", "400",
            "--oids", "30",
            "--seed", "2",
            "--query-ratio", "0.1",
            "--delete-ratio", "0.05",
            "--max-query-area", "0.05",
            "--out", str(path),
        ],
    )
    assert result.exit_code == 0, result.output
    return path


def test_version_should_display_version_when_long_flag():
    result = runner.invoke(app, ["--version"])

    assert result.exit_code == 0
    assert f"rum {__version__}" in result.output


def test_version_should_display_version_when_short_flag():
    result = runner.invoke(app, ["-v"])

    assert result.exit_code == 0
    assert f"rum {__version__}" in result.output


def test_gen_should_write_trace_with_header_and_every_op(trace, screen):
    assert len(trace.read_text().splitlines()) == 401
    assert f"Wrote 400 moving ops to {trace}" in screen.getvalue()


def test_gen_should_fail_when_oids_exceed_ops(tmp_path):
    result = runner.invoke(
        app, ["gen", "--ops", "10", "--oids", "20", "--out", str(tmp_path / "t.csv")]
    )

    assert result.exit_code == 1
    assert "must not exceed" in result.output


def test_ingest_should_save_report_for_each_strategy(tmp_path, trace, screen):
    report = tmp_path / "out" / "ingest.json"

    result = runner.invoke(
        app,
        [
            "ingest",
            "--trace", str(trace),
            "-s", "eager",
            "-s", "um_fmbv",
            "--memory-budget", "2560",
            "--threads", "2",
            "--data-dir", str(tmp_path / "data"),
            "--report", str(report),
            "--quiet",
        ],
    )

    assert result.exit_code == 0, result.output
    assert "Report saved to" in result.output
    assert "Ingest: moving.csv" in screen.getvalue()
    saved = FileReportRepository().load(report)
    assert [r.strategy for r in saved] == ["eager", "um_fmbv"]
    assert all(r.threads == 2 and r.workload == "moving" for r in saved)


def test_mixed_should_verify_all_strategies(tmp_path, trace, screen):
    result = runner.invoke(
        app,
        [
            "mixed",
            "--trace", str(trace),
            "-s", "all",
            "--verify",
            "--memory-budget", "2560",
            "--merge-threshold", "3",
            "--curve", "zorder",
            "--quiet",
        ],
    )

    assert result.exit_code == 0, result.output
    output = screen.getvalue()
    assert "Mixed: moving.csv" in output
    assert "um_fmbv" in output
    assert "validation" in output


def test_query_then_report_show_should_render_saved_markdown(tmp_path, trace, screen):
    report = tmp_path / "queries.md"

    result = runner.invoke(
        app,
        [
            "query",
            "--trace", str(trace),
            "-s", "validation",
            "-s", "um_fmbv",
            "--selectivity", "0.01",
            "--queries", "4",
            "--report", str(report),
            "--quiet",
        ],
    )
    assert result.exit_code == 0, result.output

    shown = runner.invoke(app, ["report", "show", str(report)])

    assert shown.exit_code == 0, shown.output
    output = screen.getvalue()
    assert "Report: queries.md" in output
    assert "0.01: " in output
    assert "um_fmbv" in output


def test_ingest_should_exit_1_when_strategy_unknown(trace):
    result = runner.invoke(app, ["ingest", "--trace", str(trace), "-s", "bogus"])

    assert result.exit_code == 1
    assert "Unknown strategy 'bogus'" in result.output
    assert "um_fmbv" in result.output


def test_query_should_exit_1_when_selectivity_out_of_range(trace):
    result = runner.invoke(
        app, ["query", "--trace", str(trace), "--selectivity", "1.5", "--quiet"]
    )

    assert result.exit_code == 1


def test_ingest_should_exit_3_when_trace_missing(tmp_path):
    result = runner.invoke(app, ["ingest", "--trace", str(tmp_path / "absent.csv"), "--quiet"])

    assert result.exit_code == 3


def test_report_show_should_exit_3_when_report_missing(tmp_path):
    result = runner.invoke(app, ["report", "show", str(tmp_path / "absent.json")])

    assert result.exit_code == 3
    assert "Report not found" in result.output


def test_should_exit_1_when_log_level_unknown(trace):
    result = runner.invoke(app, ["--log-level", "chatty", "ingest", "--trace", str(trace)])

    assert result.exit_code == 1
    assert "Unknown log level" in result.output


def test_run_should_exit_1_when_option_unknown(screen):
    with patch("sys.argv", ["rum", "ingest", "--no-such-option"]):
        with pytest.raises(SystemExit) as exc_info:
            run()

    assert exc_info.value.code == 1
