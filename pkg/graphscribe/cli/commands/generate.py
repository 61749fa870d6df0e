"""
Generate Command - Verbalize graphs with a trained checkpoint
"""

import zlib
from pathlib import Path
from typing import List, Optional

import numpy as np

from graphscribe.cli.manifest import RunManifest
from graphscribe.cli.utils import check_beam, console, new_run_dir, parse_choice, spinner, success
from graphscribe.data.datasets import parse_graphs
from graphscribe.errors import DataError
from graphscribe.evaluation.decoding import Generation, generate, write_traces
from graphscribe.evaluation.harness import write_hypotheses
from graphscribe.models.config import OrderMode
from graphscribe.supervision.sidecar import is_sidecar, read_sidecar
from graphscribe.training.checkpoint import load_checkpoint


def generate_text(
    checkpoint: Path,
    input_path: Path,
    run_dir: Optional[Path] = None,
    order_mode: str = OrderMode.LEARNED.value,
    beam: int = 5,
    threshold: Optional[float] = None,
    max_len: Optional[int] = None,
    device: str = "cpu",
    seed: int = 13,
) -> List[Generation]:
    """
    Generate one sentence per graph and write hypotheses and decode traces.

    Args:
        checkpoint: Checkpoint file
        input_path: Graph JSONL (``{"id", "triples"}``) or a supervision sidecar
        run_dir: Run directory (fresh one under the run root when None)
        order_mode: learned, node_level, random, gold or input
        beam: Beam width
        threshold: Copy threshold override
        max_len: Cap on generated tokens
        device: Torch device
        seed: Seed for the random order mode
    """
    mode = parse_choice(OrderMode, order_mode, "--order-mode")
    check_beam(beam)
    loaded = load_checkpoint(checkpoint, device)
    n_slots = loaded.model.config.n_slots

    if is_sidecar(input_path):
        records = read_sidecar(input_path).records
        items = [(r.graph, r.order_label.resized(n_slots)) for r in records]
    else:
        items = [(graph, None) for graph in parse_graphs(input_path, n_slots)]
    if mode == OrderMode.GOLD and any(gold is None for _, gold in items):
        raise DataError("Gold order needs reference orders: pass a supervision sidecar as input")

    run_dir = new_run_dir("generate", run_dir)
    manifest = RunManifest(
        command="generate",
        config=loaded.config.model_dump(mode="json"),
        seed=seed,
        arguments={"order_mode": mode.value, "beam": beam, "threshold": threshold, "max_len": max_len},
    )
    manifest.add_input("checkpoint", checkpoint)
    manifest.add_input("graphs", input_path)

    generations = []
    with spinner("Generating") as progress:
        task = progress.add_task("Generating...", total=len(items))
        for graph, gold in items:
            rng = np.random.default_rng([seed, zlib.crc32(graph.id.encode("utf-8"))])
            generations.append(
                generate(
                    loaded.model, graph, loaded.vocab,
                    order_mode=mode, beam=beam, max_len=max_len, threshold=threshold, gold=gold, rng=rng,
                )
            )
            progress.update(task, advance=1)

    hypotheses = run_dir / "hypotheses.jsonl"
    traces = run_dir / "traces.jsonl"
    write_hypotheses(generations, hypotheses)
    write_traces(generations, traces)
    manifest.add_output("hypotheses", hypotheses)
    manifest.add_output("traces", traces)
    manifest.finish()
    manifest.write(run_dir)

    for g in generations[:5]:
        console.print(f"[dim]{g.id}[/dim] [{g.order}] {g.text}")
    success(f"Wrote {len(generations)} hypotheses to {hypotheses}")
    return generations
