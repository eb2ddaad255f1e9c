import logging
import sys
import tempfile
from contextlib import ExitStack
from pathlib import Path
from typing import Annotated, Any, Callable, NoReturn

import click
import typer
from dotenv import find_dotenv, load_dotenv
from rich.console import Console
from rich.logging import RichHandler

from lsmrum import __version__

from lsmrum.application import (
    GenerateWorkload,
    IngestResult,
    RunIngest,
    RunMixed,
    RunQueries,
    VerificationError,
)
from lsmrum.application.run_queries import SELECTIVITY_LADDER
from lsmrum.domain.contracts.config import EngineConfig
from lsmrum.domain.contracts.results import BenchReport, ReportFormat
from lsmrum.domain.contracts.workload import WorkloadKind, WorkloadSpec
from lsmrum.domain.curve import Curve
from lsmrum.infrastructure import (
    CsvTraceStore,
    EngineConfigLoader,
    FileReportRepository,
    FileReportRepositoryError,
)
from lsmrum.infrastructure.console_display import (
    display_generated,
    display_reports,
    display_significance,
    display_verification_diff,
    progress_bar,
)
from lsmrum.infrastructure.indexes import EngineError, get_index, known_strategies
from lsmrum.infrastructure.storage import StorageError

load_dotenv(find_dotenv(usecwd=True), override=True)

EXIT_USAGE = 1
EXIT_VERIFICATION = 2
EXIT_IO = 3


def _version_callback(value: bool) -> None:
    if value:
        typer.echo(f"rum {__version__}")
        raise typer.Exit()


app = typer.Typer(
    name="rum",
    help="LSM R-tree with an Update Memo: workload generation and benchmarks",
    no_args_is_help=True,
)


@app.callback(invoke_without_command=True)
def main(
    version: Annotated[
        bool,
        typer.Option(
            "--version",
            "-v",
            help="Show version and exit",
            callback=_version_callback,
            is_eager=True,
        ),
    ] = False,
    log_level: Annotated[
        str,
        typer.Option(
            "--log-level",
            envvar="RUM_LOG_LEVEL",
            help="Logging level (DEBUG, INFO, WARNING, ERROR)",
        ),
    ] = "WARNING",
) -> None:
    level = logging.getLevelName(log_level.upper())
    if not isinstance(level, int):
        typer.echo(f"Error: Unknown log level '{log_level}'", err=True)
        raise typer.Exit(EXIT_USAGE)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True)],
        force=True,
    )


report_app = typer.Typer(help="Saved report commands")
app.add_typer(report_app, name="report")

_config_loader = EngineConfigLoader()
_trace_store = CsvTraceStore()
_report_repository = FileReportRepository()


TraceArg = Annotated[Path, typer.Option("--trace", "-t", help="Workload trace CSV")]
StrategyOption = Annotated[
    list[str] | None,
    typer.Option(
        "--strategy",
        "-s",
        help="Strategy to run; repeat for several, or 'all'",
    ),
]
ConfigOption = Annotated[
    Path | None,
    typer.Option("--config", "-c", help="Engine config file (YAML or key=value lines)"),
]
MemoryBudgetOption = Annotated[
    int | None,
    typer.Option("--memory-budget", help="Memory component budget in bytes"),
]
MergeThresholdOption = Annotated[
    int | None, typer.Option("--merge-threshold", help="Components per prefix merge")
]
CurveOption = Annotated[
    Curve | None, typer.Option("--curve", help="Component sort order")
]
ReportOption = Annotated[
    Path | None,
    typer.Option("--report", "-r", help="Write the report here (.json, .csv or .md)"),
]
FormatOption = Annotated[
    ReportFormat | None,
    typer.Option("--format", "-f", help="Report format (default: from the file suffix)"),
]
DataDirOption = Annotated[
    Path | None,
    typer.Option("--data-dir", help="Keep component files here (default: a temp dir)"),
]
QuietOption = Annotated[bool, typer.Option("--quiet", "-q", help="Hide progress bar")]


def _exit_code(e: Exception) -> int:
    if isinstance(e, VerificationError):
        return EXIT_VERIFICATION
    if isinstance(e, (StorageError, OSError, FileReportRepositoryError)):
        return EXIT_IO
    if isinstance(e, EngineError) and isinstance(e.__cause__, StorageError):
        return EXIT_IO
    return EXIT_USAGE


def _fail(e: Exception) -> NoReturn:
    if isinstance(e, VerificationError):
        display_verification_diff(e.strategy, e.op_index, e.missing, e.extra)
    typer.echo(f"Error: {e}", err=True)
    raise typer.Exit(_exit_code(e))


def _strategies(requested: list[str] | None, default: str) -> list[str]:
    names = requested or [default]
    if "all" in names:
        return list(known_strategies())
    unknown = [n for n in names if n not in known_strategies()]
    if unknown:
        raise ValueError(
            f"Unknown strategy '{unknown[0]}'. "
            f"Available: all, {', '.join(known_strategies())}"
        )
    return names


def _load_config(
    config: Path | None,
    memory_budget: int | None,
    merge_threshold: int | None,
    curve: Curve | None,
) -> EngineConfig:
    return _config_loader.load(
        config,
        overrides={
            "memory_budget_bytes": memory_budget,
            "merge_threshold": merge_threshold,
            "curve": curve,
        },
    )


def _save_report(
    path: Path | None,
    out_format: ReportFormat | None,
    reports: list[BenchReport],
    **kwargs: Any,
) -> None:
    if path is None:
        return
    saved = _report_repository.save(path, reports, out_format=out_format, **kwargs)
    typer.echo(f"Report saved to {saved}")


def _run_each(
    strategies: list[str],
    total: int,
    quiet: bool,
    data_dir: Path | None,
    run_one: Callable[[str, Path, Callable[[int], None] | None], IngestResult],
) -> list[BenchReport]:
    reports = []
    with ExitStack() as stack:
        if data_dir is None:
            data_dir = Path(stack.enter_context(tempfile.TemporaryDirectory(prefix="rum-")))
        for strategy in strategies:
            if quiet:
                result = run_one(strategy, data_dir, None)
            else:
                with progress_bar(f"Running {strategy}", total) as (progress, task_id):

                    def on_progress(n: int) -> None:
                        progress.advance(task_id, n)

                    result = run_one(strategy, data_dir, on_progress)
            result.index.close()
            reports.append(result.report)
    return reports


@app.command(help="Generate a synthetic workload trace.")
def gen(
    kind: Annotated[
        WorkloadKind, typer.Option("--kind", "-k", help="Workload shape")
    ] = WorkloadKind.MOVING,
    ops: Annotated[int, typer.Option("--ops", "-n", help="Number of ops")] = 100_000,
    oids: Annotated[int, typer.Option("--oids", help="Number of distinct objects")] = 100,
    seed: Annotated[int, typer.Option("--seed", help="Random seed")] = 0,
    out: Annotated[Path, typer.Option("--out", "-o", help="Trace CSV to write")] = Path(
        "trace.csv"
    ),
    query_ratio: Annotated[
        float, typer.Option("--query-ratio", help="Fraction of ops that are range queries")
    ] = 0.0,
    delete_ratio: Annotated[
        float, typer.Option("--delete-ratio", help="Chance a live object is deleted")
    ] = 0.0,
    max_query_area: Annotated[
        float,
        typer.Option("--max-query-area", help="Largest query window, fraction of world"),
    ] = 0.0001,
    step_fraction: Annotated[
        float, typer.Option("--step-fraction", help="Moving step sigma, fraction of world")
    ] = 0.0005,
    hotspots: Annotated[int, typer.Option("--hotspots", help="Checkin hotspots")] = 16,
) -> None:
    spec = WorkloadSpec(
        kind=kind,
        n_ops=ops,
        n_oids=oids,
        seed=seed,
        query_ratio=query_ratio,
        delete_ratio=delete_ratio,
        max_query_area=max_query_area,
        step_fraction=step_fraction,
        hotspots=hotspots,
    )
    try:
        count = GenerateWorkload(_trace_store).run(spec, out)
        display_generated(str(out), count, kind.value)
    except Exception as e:
        _fail(e)


@app.command(help="Ingest a trace into one or more strategies and time it.")
def ingest(
    trace: TraceArg,
    strategy: StrategyOption = None,
    threads: Annotated[int, typer.Option("--threads", "-j", help="Ingest threads")] = 1,
    config: ConfigOption = None,
    memory_budget: MemoryBudgetOption = None,
    merge_threshold: MergeThresholdOption = None,
    curve: CurveOption = None,
    report: ReportOption = None,
    out_format: FormatOption = None,
    data_dir: DataDirOption = None,
    quiet: QuietOption = False,
) -> None:
    try:
        strategies = _strategies(strategy, "um_fmbv")
        engine_config = _load_config(config, memory_budget, merge_threshold, curve)
        ops = _trace_store.read(trace)
        runner = RunIngest(_trace_store, get_index)

        reports = _run_each(
            strategies,
            sum(1 for op in ops if op.window is None),
            quiet,
            data_dir,
            lambda name, path, progress: runner.ingest(
                ops, name, engine_config, threads, path, trace.stem, progress
            ),
        )
        display_reports(reports, title=f"Ingest: {trace.name}")
        _save_report(report, out_format, reports)
    except Exception as e:
        _fail(e)


@app.command(help="Replay a trace with interleaved queries, optionally verified.")
def mixed(
    trace: TraceArg,
    strategy: StrategyOption = None,
    verify: Annotated[
        bool, typer.Option("--verify", help="Check every query against a replay oracle")
    ] = False,
    config: ConfigOption = None,
    memory_budget: MemoryBudgetOption = None,
    merge_threshold: MergeThresholdOption = None,
    curve: CurveOption = None,
    report: ReportOption = None,
    out_format: FormatOption = None,
    data_dir: DataDirOption = None,
    quiet: QuietOption = False,
) -> None:
    try:
        strategies = _strategies(strategy, "um_fmbv")
        engine_config = _load_config(config, memory_budget, merge_threshold, curve)
        ops = _trace_store.read(trace)
        runner = RunMixed(_trace_store, get_index)

        reports = _run_each(
            strategies,
            len(ops),
            quiet,
            data_dir,
            lambda name, path, progress: runner.replay(
                ops, name, engine_config, verify, path, trace.stem, progress
            ),
        )
        display_reports(reports, title=f"Mixed: {trace.name}")
        _save_report(report, out_format, reports)
    except Exception as e:
        _fail(e)


@app.command(help="Ingest, then time random windows over a selectivity ladder.")
def query(
    trace: TraceArg,
    strategy: StrategyOption = None,
    selectivity: Annotated[
        list[float] | None,
        typer.Option(
            "--selectivity",
            help="Window area as a fraction of the world; repeat for several",
        ),
    ] = None,
    queries: Annotated[
        int, typer.Option("--queries", help="Windows per selectivity")
    ] = 100,
    seed: Annotated[int, typer.Option("--seed", help="Window seed")] = 0,
    config: ConfigOption = None,
    memory_budget: MemoryBudgetOption = None,
    merge_threshold: MergeThresholdOption = None,
    curve: CurveOption = None,
    report: ReportOption = None,
    out_format: FormatOption = None,
    data_dir: DataDirOption = None,
    quiet: QuietOption = False,
) -> None:
    try:
        strategies = _strategies(strategy, "um_fmbv")
        engine_config = _load_config(config, memory_budget, merge_threshold, curve)
        selectivities = selectivity or list(SELECTIVITY_LADDER)
        if queries < 1 or any(not 0 < s <= 1 for s in selectivities):
            raise ValueError("queries must be >= 1 and selectivities in (0, 1]")
        ops = _trace_store.read(trace)
        runner = RunQueries(RunIngest(_trace_store, get_index))

        with ExitStack() as stack:
            if data_dir is None:
                data_dir = Path(
                    stack.enter_context(tempfile.TemporaryDirectory(prefix="rum-"))
                )
            total = queries * len(selectivities) * len(strategies)
            if quiet:
                result = runner.run(
                    ops, strategies, engine_config, selectivities, queries, seed,
                    data_dir, trace.stem,
                )
            else:
                with progress_bar("Querying", total) as (progress, task_id):

                    def on_progress(n: int) -> None:
                        progress.advance(task_id, n)

                    result = runner.run(
                        ops, strategies, engine_config, selectivities, queries, seed,
                        data_dir, trace.stem, on_progress,
                    )

        display_reports(result.reports, title=f"Queries: {trace.name}")
        display_significance(result.significance)
        _save_report(report, out_format, result.reports, significance=result.significance)
    except Exception as e:
        _fail(e)


@report_app.command("show", help="Render a saved json, csv or md report.")
def report_show(
    path: Annotated[Path, typer.Argument(help="Report file")],
) -> None:
    try:
        reports = _report_repository.load(path)
        display_reports(reports, title=f"Report: {path.name}")
        display_significance(_report_repository.load_significance(path))
    except Exception as e:
        _fail(e)


def run() -> None:
    """Console entry point; click usage errors exit 1 like every other usage error."""
    try:
        code = app(standalone_mode=False)
    except click.exceptions.UsageError as e:
        e.show()
        sys.exit(EXIT_USAGE)
    except click.exceptions.Abort:
        typer.echo("Aborted!", err=True)
        sys.exit(EXIT_USAGE)
    sys.exit(code if isinstance(code, int) else 0)


if __name__ == "__main__":
    run()
