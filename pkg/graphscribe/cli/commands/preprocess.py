"""
Preprocess Command - Build supervision sidecars from raw datasets
"""

from pathlib import Path
from typing import List

from graphscribe.cli.manifest import RunManifest
from graphscribe.cli.utils import console, create_table, info, parse_choice, success, warning
from graphscribe.data.datasets import DatasetFormat, parse_dataset
from graphscribe.errors import DataError
from graphscribe.supervision.sidecar import SupervisionSummary, build_supervision, summarize, write_sidecar
from graphscribe.supervision.tagging import COARSE, get_tagger

MAX_REPORTED_ERRORS = 10


def sidecar_path(output_dir: Path, source: Path) -> Path:
    return Path(output_dir) / f"{Path(source).stem}.sup.jsonl"


def print_summary(name: str, summary: SupervisionSummary):
    table = create_table(f"{name}: {summary.count} examples", ["Triplets", "Examples"])
    for length, count in summary.order_lengths.items():
        table.add_row(str(length), str(count))
    console.print(table)
    info(f"Copy rate: {summary.copy_rate:.3f}")
    top = ", ".join(f"{tag} {share:.2f}" for tag, share in list(summary.tag_distribution.items())[:6])
    info(f"Tag distribution: {top}")


def preprocess_datasets(
    inputs: List[Path],
    output_dir: Path,
    format: str = DatasetFormat.JSONL.value,
    n_slots: int = 8,
    tagger: str = "lexicon",
    oversize: str = "reject",
) -> List[Path]:
    """
    Write one supervision sidecar per input file.

    Args:
        inputs: Dataset files (one per split)
        output_dir: Directory receiving ``<stem>.sup.jsonl`` files and the manifest
        format: Dataset format
        n_slots: Slot count N
        tagger: POS tagger id
        oversize: Policy for graphs larger than N

    Returns:
        Paths of the written sidecars
    """
    dataset_format = parse_choice(DatasetFormat, format, "--format")
    tagger_impl = get_tagger(tagger)
    output_dir = Path(output_dir)
    manifest = RunManifest(
        command="preprocess",
        arguments={"format": format, "n_slots": n_slots, "tagger": tagger, "oversize": oversize},
    )

    written = []
    for path in inputs:
        report = parse_dataset(path, dataset_format, n_slots=n_slots, oversize=oversize)
        for record_error in report.errors[:MAX_REPORTED_ERRORS]:
            warning(str(record_error))
        if len(report.errors) > MAX_REPORTED_ERRORS:
            warning(f"... and {len(report.errors) - MAX_REPORTED_ERRORS} more malformed records")
        if report.skipped:
            info(f"{path}: skipped {report.skipped} lexicalisations marked bad")
        if not report.examples:
            raise DataError(f"{path} contains no usable examples")

        records = [build_supervision(example, n_slots, tagger_impl, COARSE) for example in report.examples]
        target = sidecar_path(output_dir, path)
        write_sidecar(records, target, n_slots, tagger, COARSE)
        print_summary(Path(path).name, summarize(records, COARSE))

        manifest.add_input(Path(path).stem, path)
        manifest.add_output(Path(path).stem, target)
        written.append(target)
        success(f"Wrote {len(records)} records to {target}")

    manifest.finish()
    manifest.write(output_dir)
    return written
