"""
Convert Command - WebNLG/DART releases to canonical JSONL
"""

from pathlib import Path

from graphscribe.cli.utils import parse_choice, success, warning
from graphscribe.data.datasets import DatasetFormat, ParseReport, convert_dataset
from graphscribe.errors import DataError


def convert_file(input_path: Path, format: str, output: Path) -> ParseReport:
    report = convert_dataset(input_path, parse_choice(DatasetFormat, format, "--format"), output)
    if report.errors:
        warning(f"Skipped {len(report.errors)} malformed records")
    if not report.examples:
        raise DataError(f"{input_path} contains no usable examples")
    success(f"Wrote {len(report.examples)} examples to {output}")
    return report
