from contextlib import contextmanager
from typing import Generator, Iterable

from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskID, TextColumn
from rich.table import Table
from rich.text import Text

from ..domain.contracts.results import BenchReport, LatencyStats, SignificanceResult
from ..domain.oracle import ResultKey

console = Console()

_DIFF_LIMIT = 10


def display_reports(reports: list[BenchReport], title: str = "Results") -> None:
    if not reports:
        console.print("[dim]No reports[/dim]")
        return

    table = Table(title=title, show_header=True, header_style="bold cyan")

    table.add_column("Strategy", style="dim")
    table.add_column("Threads", justify="right")
    table.add_column("Ops", justify="right")
    table.add_column("Update s", justify="right")
    table.add_column("Ops/ms", justify="right")
    table.add_column("Flushes", justify="right")
    table.add_column("Merges", justify="right")
    table.add_column("UM max", justify="right")
    table.add_column("Cleaned", justify="right")
    table.add_column("Pages read", justify="right")

    best = max(r.throughput_ops_per_ms for r in reports)
    for r in reports:
        table.add_row(
            r.strategy,
            str(r.threads),
            str(r.ops),
            f"{r.update_seconds:.3f}",
            Text(f"{r.throughput_ops_per_ms:.1f}", style=_style(r.throughput_ops_per_ms, best)),
            str(r.flush_count),
            str(r.merge_count),
            str(r.um_size_max),
            str(sum(r.clean_removals.values())),
            str(r.pages_scanned),
        )

    console.print()
    console.print(table)

    with_deciles = [r for r in reports if r.decile_query_ms]
    if with_deciles:
        _display_deciles(with_deciles)

    for r in reports:
        if r.query_latency:
            display_latency(r.strategy, r.query_latency)
    console.print()


def _display_deciles(reports: list[BenchReport]) -> None:
    table = Table(
        title="Average query ms per decile of data processed",
        show_header=True,
        header_style="bold cyan",
    )
    table.add_column("Strategy", style="dim")
    width = max(len(r.decile_query_ms) for r in reports)
    for i in range(width):
        table.add_column(f"{(i + 1) * 10}%", justify="right")

    for r in reports:
        cells = [f"{ms:.3f}" for ms in r.decile_query_ms]
        table.add_row(r.strategy, *cells, *["-"] * (width - len(cells)))

    console.print()
    console.print(table)


def display_latency(strategy: str, stats: Iterable[LatencyStats]) -> None:
    table = Table(
        title=f"Query latency: {strategy}",
        show_header=True,
        header_style="bold cyan",
    )
    table.add_column("Selectivity", style="dim")
    table.add_column("N", justify="right")
    table.add_column("Mean ms", justify="right")
    table.add_column("95% CI", justify="center")
    table.add_column("Stddev", justify="right")

    for s in stats:
        table.add_row(
            s.label,
            str(s.n),
            f"{s.mean_ms:.3f}",
            f"[dim]({s.ci_lower:.3f}-{s.ci_upper:.3f})[/dim]",
            f"[dim]{s.stddev_ms:.3f}[/dim]",
        )

    console.print()
    console.print(table)


def display_significance(results: list[SignificanceResult]) -> None:
    if not results:
        return

    console.print()
    console.print("[bold]Statistical Significance (Welch's t-test, α=0.05):[/bold]")
    console.print()

    for r in results:
        if r.significant:
            slower = r.strategy2 if r.faster == r.strategy1 else r.strategy1
            console.print(
                f"  [green]✓[/green] {r.label}: {r.faster} < {slower} "
                f"[dim](p≤{r.p_value})[/dim]"
            )
        else:
            console.print(
                f"  [dim]–[/dim] {r.label}: {r.strategy1} ≈ {r.strategy2} "
                f"[dim](no significant difference)[/dim]"
            )

    console.print()


def display_verification_diff(
    strategy: str,
    op_index: int,
    missing: set[ResultKey],
    extra: set[ResultKey],
) -> None:
    content = [
        f"[bold cyan]QUERY[/bold cyan] op #{op_index}",
        "",
        f"[bold red]MISSING[/bold red] ({len(missing)})",
    ]
    content += [f"  oid {oid} at ({x}, {y})" for oid, x, y in sorted(missing)[:_DIFF_LIMIT]]
    content += ["", f"[bold red]EXTRA[/bold red] ({len(extra)})"]
    content += [f"  oid {oid} at ({x}, {y})" for oid, x, y in sorted(extra)[:_DIFF_LIMIT]]
    if len(missing) > _DIFF_LIMIT or len(extra) > _DIFF_LIMIT:
        content.append(f"[dim]showing first {_DIFF_LIMIT} of each[/dim]")

    console.print()
    console.print(
        Panel(
            "\n".join(content),
            title=f"[bold]Verification failed: {strategy}[/bold]",
            border_style="red",
        )
    )


def display_generated(path: str, count: int, kind: str) -> None:
    console.print(
        f"\n[bold green]Complete![/bold green] Wrote {count} {kind} ops to {path}"
    )


@contextmanager
def progress_bar(
    description: str, total: int
) -> Generator[tuple[Progress, TaskID], None, None]:
    progress = Progress(
        SpinnerColumn(),
        TextColumn("[bold blue]{task.description}"),
        BarColumn(),
        TextColumn("[progress.percentage]{task.percentage:>3.0f}%"),
        TextColumn("({task.completed}/{task.total})"),
        console=console,
    )
    with progress:
        task_id = progress.add_task(description, total=total)
        yield progress, task_id


def _style(value: float, best: float) -> str:
    if best <= 0:
        return "dim"
    ratio = value / best
    if ratio >= 0.8:
        return "bold green"
    elif ratio >= 0.6:
        return "yellow"
    elif ratio >= 0.4:
        return "orange3"
    else:
        return "bold red"
