"""
Evaluate Command - Score a checkpoint on a supervision split
"""

from pathlib import Path
from typing import Optional

import pandas as pd

from graphscribe.cli.manifest import RunManifest
from graphscribe.cli.utils import check_beam, new_run_dir, parse_choice, success
from graphscribe.evaluation.harness import EvaluationHarness, MetricsReport, write_hypotheses
from graphscribe.models.config import OrderMode
from graphscribe.supervision.sidecar import read_sidecar
from graphscribe.training.checkpoint import load_checkpoint


def size_bucket_frame(report: MetricsReport) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {"variant": report.order_mode, "bucket": bucket, "bleu4": row["bleu4"], "count": row["count"]}
            for bucket, row in report.size_buckets.items()
        ],
        columns=["variant", "bucket", "bleu4", "count"],
    )


def evaluate_checkpoint(
    checkpoint: Path,
    split: Path,
    run_dir: Optional[Path] = None,
    order_mode: str = OrderMode.LEARNED.value,
    beam: int = 5,
    threshold: Optional[float] = None,
    max_len: Optional[int] = None,
    device: str = "cpu",
    seed: int = 13,
    write_tsv: bool = True,
) -> MetricsReport:
    """
    Generate for every example of ``split`` and write ``metrics.json``,
    ``examples.tsv``, ``size_buckets.csv`` and ``hypotheses.jsonl``.
    """
    mode = parse_choice(OrderMode, order_mode, "--order-mode")
    check_beam(beam)
    loaded = load_checkpoint(checkpoint, device)
    sidecar = read_sidecar(split)

    run_dir = new_run_dir("evaluate", run_dir)
    manifest = RunManifest(
        command="evaluate",
        config=loaded.config.model_dump(mode="json"),
        seed=seed,
        arguments={"order_mode": mode.value, "beam": beam, "threshold": threshold, "max_len": max_len},
    )
    manifest.add_input("checkpoint", checkpoint)
    manifest.add_input("split", split)

    harness = EvaluationHarness(
        loaded.model, loaded.vocab,
        order_mode=mode, beam=beam, threshold=threshold, max_len=max_len, seed=seed,
    )
    generations = harness.generate_all(sidecar.records, show_progress=True)
    report = harness.evaluate_generations(sidecar.records, generations)

    outputs = {
        "metrics": run_dir / "metrics.json",
        "size_buckets": run_dir / "size_buckets.csv",
        "hypotheses": run_dir / "hypotheses.jsonl",
    }
    report.save_json(outputs["metrics"])
    size_bucket_frame(report).to_csv(outputs["size_buckets"], index=False, float_format="%.4f")
    write_hypotheses(generations, outputs["hypotheses"])
    if write_tsv:
        outputs["examples"] = run_dir / "examples.tsv"
        report.write_tsv(outputs["examples"])

    for name, path in outputs.items():
        manifest.add_output(name, path)
    manifest.finish()
    manifest.write(run_dir)

    harness.print_report(report)
    success(f"Metrics written to {outputs['metrics']}")
    return report
