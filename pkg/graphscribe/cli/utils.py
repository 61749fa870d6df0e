"""
CLI Utilities

Console helpers, logging setup, exit-code mapping and run directories.
"""

import logging
import sys
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from graphscribe.errors import (
    CheckpointError,
    ConfigError,
    DataError,
    GraphscribeError,
    NumericError,
    UnknownTaggerError,
    VocabularyError,
)
from graphscribe.settings import Settings, settings

console = Console()

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def success(message: str):
    """Print success message."""
    console.print(f"[bold green]✓[/bold green] {message}")


def error(message: str, exit_code: int = EXIT_FAILURE):
    """Print error message and optionally exit."""
    console.print(f"[bold red]✗[/bold red] {message}", style="red")
    if exit_code:
        sys.exit(exit_code)


def warning(message: str):
    """Print warning message."""
    console.print(f"[bold yellow]⚠[/bold yellow] {message}", style="yellow")


def info(message: str):
    """Print info message."""
    console.print(f"[bold blue]ℹ[/bold blue] {message}")


def spinner(text: str):
    """Create a spinner progress."""
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=console,
        transient=True,
    )


def create_table(title: str, columns: list) -> Table:
    """Create a styled table."""
    table = Table(title=title, show_header=True, header_style="bold magenta")
    for col in columns:
        table.add_column(col)
    return table


def print_panel(content: str, title: str, style: str = "cyan"):
    """Print content in a panel."""
    console.print(Panel(content, title=title, border_style=style))


def format_duration(seconds: float) -> str:
    """Format duration in human-readable format."""
    if seconds < 1:
        return f"{seconds*1000:.0f}ms"
    elif seconds < 60:
        return f"{seconds:.1f}s"
    else:
        minutes = int(seconds // 60)
        secs = int(seconds % 60)
        return f"{minutes}m {secs}s"


def setup_logging(level: Optional[str] = None):
    """Route package logs through rich at the requested (or configured) level."""
    if level is not None:
        numeric = getattr(logging, level.upper(), None)
        if not isinstance(numeric, int):
            raise ConfigError(f"Unknown log level '{level}'")
    else:
        numeric = settings.observability.level
    logging.basicConfig(
        level=numeric,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=settings.observability.debug, show_path=False)],
        force=True,
    )


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    if isinstance(exc, (ConfigError, UnknownTaggerError)):
        return EXIT_USAGE
    if isinstance(exc, (DataError, VocabularyError, CheckpointError)):
        return EXIT_DATA
    return EXIT_FAILURE


@contextmanager
def handle_errors():
    """Turn package errors into a red message and the matching exit code."""
    try:
        yield
    except GraphscribeError as e:
        error(str(e), exit_code_for(e))


def parse_seeds(text: str) -> List[int]:
    """``"13,14,15"`` -> [13, 14, 15]."""
    try:
        seeds = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"Seeds must be comma-separated integers, got '{text}'") from e
    if not seeds:
        raise ConfigError("At least one seed is required")
    return seeds


def new_run_dir(command: str, run_dir: Optional[Path] = None) -> Path:
    """
    A fresh run directory: ``run_dir`` when given, otherwise
    ``<run root>/<command>-<UTC timestamp>``. Directories that already hold a
    manifest are never reused.
    """
    if run_dir is None:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%d-%H%M%S-%f")
        run_dir = Settings.from_env().runtime.run_root / f"{command}-{stamp}"
    run_dir = Path(run_dir)
    if (run_dir / "manifest.json").exists():
        raise ConfigError(f"Run directory {run_dir} already holds a run; choose another --run-dir")
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


def print_mapping(title: str, rows: Dict[str, object], columns: Sequence[str] = ("Key", "Value")):
    table = create_table(title, list(columns))
    for key, value in rows.items():
        table.add_row(str(key), f"{value:.4f}" if isinstance(value, float) else str(value))
    console.print(table)


def parse_choice(enum_cls, value: str, flag: str):
    """Enum member for ``value``; unknown values are usage errors."""
    try:
        return enum_cls(value)
    except ValueError as e:
        allowed = ", ".join(member.value for member in enum_cls)
        raise ConfigError(f"Invalid {flag} '{value}'. Choose from: {allowed}") from e


def check_beam(beam: int) -> int:
    if beam < 1:
        raise ConfigError(f"--beam must be at least 1, got {beam}")
    return beam
