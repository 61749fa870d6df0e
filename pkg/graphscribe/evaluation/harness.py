"""
Evaluation Harness

Generates sentences for a split under an order mode and scores them with
every corpus metric, the order metrics and the graph-size buckets.
"""

from __future__ import annotations

import json
import logging
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from rich.console import Console
from rich.progress import Progress
from rich.table import Table

from graphscribe.errors import DataError
from graphscribe.evaluation.decoding import Generation, generate
from graphscribe.evaluation.metrics import (
    bleu4,
    bucketed_bleu,
    chrf_pp,
    cider,
    order_metrics,
    rouge_l,
    sentence_bleu,
)
from graphscribe.models.config import OrderMode
from graphscribe.models.model import GraphToTextModel
from graphscribe.supervision.sidecar import SupervisionRecord
from graphscribe.supervision.vocab import Vocabulary

logger = logging.getLogger(__name__)
console = Console()


@dataclass
class ExampleResult:
    """Per-example breakdown row."""
    id: str
    hypothesis: str
    reference: str
    bleu: float
    copy_rate: float
    n_triplets: int
    order: str
    gold_order: str


@dataclass
class MetricsReport:
    """Corpus scores for one split under one order mode."""
    order_mode: str
    beam: int
    count: int
    bleu4: float
    rouge_l: float
    chrf_pp: float
    cider: float
    order_exact_match: float
    order_kendall_tau: float
    size_buckets: Dict[str, Dict[str, float]] = field(default_factory=dict)
    examples: List[ExampleResult] = field(default_factory=list)

    def summary(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("examples")
        return data

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def save_json(self, path: Path, include_examples: bool = True):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        data = self.to_dict() if include_examples else self.summary()
        with open(path, "w") as f:
            json.dump(data, f, indent=2, sort_keys=True)

    def write_tsv(self, path: Path):
        """id, hypothesis, reference, bleu, copy_rate per example."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(
            [asdict(e) for e in self.examples],
            columns=["id", "hypothesis", "reference", "bleu", "copy_rate", "n_triplets", "order", "gold_order"],
        )
        frame.to_csv(path, sep="\t", index=False, float_format="%.4f")


class EvaluationHarness:
    """
    Evaluation harness for a trained model.

    Args:
        model: Trained model
        vocab: Its vocabulary
        order_mode: learned, node_level, random, gold or input
        beam: Beam width (1 decodes greedily)
        threshold: Copy threshold (model config default when None)
        max_len: Cap on generated tokens
        seed: Seed for the random order mode
    """

    def __init__(
        self,
        model: GraphToTextModel,
        vocab: Vocabulary,
        order_mode: OrderMode | str = OrderMode.LEARNED,
        beam: int = 5,
        threshold: Optional[float] = None,
        max_len: Optional[int] = None,
        seed: int = 13,
    ):
        self.model = model
        self.vocab = vocab
        self.order_mode = OrderMode(order_mode)
        self.beam = beam
        self.threshold = threshold
        self.max_len = max_len
        self.seed = seed

    def generate_all(self, records: Sequence[SupervisionRecord], show_progress: bool = False) -> List[Generation]:
        generations = []
        n_slots = self.model.config.n_slots
        with Progress(disable=not show_progress) as progress:
            task = progress.add_task("[cyan]Generating...", total=len(records))
            for record in records:
                rng = np.random.default_rng([self.seed, zlib.crc32(record.id.encode("utf-8"))])
                generations.append(
                    generate(
                        self.model,
                        record.graph,
                        self.vocab,
                        order_mode=self.order_mode,
                        beam=self.beam,
                        max_len=self.max_len,
                        threshold=self.threshold,
                        gold=record.order_label.resized(n_slots),
                        rng=rng,
                    )
                )
                progress.update(task, advance=1)
        return generations

    def evaluate(self, records: Sequence[SupervisionRecord], show_progress: bool = False) -> MetricsReport:
        """
        Run evaluation on a split.

        Raises:
            DataError: The split is empty
        """
        if not records:
            raise DataError("Cannot evaluate an empty split")
        generations = self.generate_all(records, show_progress)
        return self._generate_report(records, generations)

    def evaluate_generations(
        self, records: Sequence[SupervisionRecord], generations: Sequence[Generation]
    ) -> MetricsReport:
        """Score generations produced earlier for ``records`` (same order)."""
        if not records:
            raise DataError("Cannot evaluate an empty split")
        if len(records) != len(generations):
            raise DataError(f"{len(generations)} generations for {len(records)} records")
        return self._generate_report(records, generations)

    def _generate_report(self, records: Sequence[SupervisionRecord], generations: Sequence[Generation]) -> MetricsReport:
        n_slots = self.model.config.n_slots
        hypotheses = [g.text for g in generations]
        references = [r.text for r in records]
        gold = [r.order_label.resized(n_slots) for r in records]
        orders = order_metrics([g.order for g in generations], gold)

        examples = [
            ExampleResult(
                id=record.id,
                hypothesis=generation.text,
                reference=record.text,
                bleu=sentence_bleu(generation.text, record.text),
                copy_rate=generation.copy_rate,
                n_triplets=len(record.triples),
                order=str(generation.order),
                gold_order=str(gold_order),
            )
            for record, generation, gold_order in zip(records, generations, gold)
        ]

        report = MetricsReport(
            order_mode=self.order_mode.value,
            beam=self.beam,
            count=len(records),
            bleu4=bleu4(hypotheses, references),
            rouge_l=rouge_l(hypotheses, references),
            chrf_pp=chrf_pp(hypotheses, references),
            cider=cider(hypotheses, references),
            order_exact_match=orders.exact_match,
            order_kendall_tau=orders.kendall_tau,
            size_buckets=bucketed_bleu(hypotheses, references, [len(r.triples) for r in records]),
            examples=examples,
        )
        logger.info(
            f"Evaluated {report.count} examples ({report.order_mode}, beam {report.beam}): "
            f"BLEU-4 {report.bleu4:.2f}"
        )
        return report

    def print_report(self, report: MetricsReport):
        """Print evaluation report."""
        console.print()
        console.print(f"[bold]Evaluation Summary[/bold] ({report.order_mode} order, beam {report.beam})")
        console.print(f"Examples: {report.count}")

        table = Table(show_header=True)
        table.add_column("Metric")
        table.add_column("Value", justify="right")
        for name, value in (
            ("BLEU-4", report.bleu4),
            ("ROUGE-L", report.rouge_l),
            ("chrF++", report.chrf_pp),
            ("CIDEr", report.cider),
            ("Order exact match %", report.order_exact_match),
            ("Order Kendall tau", report.order_kendall_tau),
        ):
            table.add_row(name, f"{value:.4f}")
        console.print(table)

        if report.size_buckets:
            console.print()
            console.print("[bold]BLEU-4 by graph size[/bold]")
            buckets = Table(show_header=True)
            buckets.add_column("Triplets")
            buckets.add_column("Examples", justify="right")
            buckets.add_column("BLEU-4", justify="right")
            for bucket, row in report.size_buckets.items():
                buckets.add_row(bucket, str(int(row["count"])), f"{row['bleu4']:.2f}")
            console.print(buckets)


def write_hypotheses(generations: Sequence[Generation], path: Path):
    """One JSON line per example: id, text, order listing and score."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for g in generations:
            row = {"id": g.id, "text": g.text, "order": str(g.order), "score": g.score, "copy_rate": g.copy_rate}
            f.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
