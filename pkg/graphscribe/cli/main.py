"""
Graphscribe CLI - Main Entry Point

Preprocess datasets, train, generate, evaluate and run ablations.
"""

from pathlib import Path
from typing import List, Optional

import typer

from graphscribe.cli.commands import ablate as ablate_cmd
from graphscribe.cli.commands import convert as convert_cmd
from graphscribe.cli.commands import evaluate as evaluate_cmd
from graphscribe.cli.commands import generate as generate_cmd
from graphscribe.cli.commands import plot as plot_cmd
from graphscribe.cli.commands import preprocess as preprocess_cmd
from graphscribe.cli.commands import synthesize as synthesize_cmd
from graphscribe.cli.commands import train as train_cmd
from graphscribe.cli.utils import handle_errors, parse_seeds, print_panel, setup_logging, warning
from graphscribe.settings import settings

app = typer.Typer(
    name="graphscribe",
    help="Knowledge-graph-to-text generation with learned triplet ordering and POS-guided copying",
    no_args_is_help=True,
    rich_markup_mode="rich",
)


@app.callback()
def callback(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING or ERROR"),
):
    """
    Graphscribe - verbalize knowledge graphs.

    Order the triplets, plan the syntax, then copy or generate each word.
    """
    with handle_errors():
        setup_logging(log_level)
    for message in settings.validate():
        warning(message)


@app.command()
def preprocess(
    inputs: List[Path] = typer.Argument(..., help="Dataset files, one per split"),
    output_dir: Path = typer.Option(..., "--output-dir", "-o", help="Directory for supervision sidecars"),
    format: str = typer.Option("jsonl", "--format", help="jsonl, webnlg-json or dart-json"),
    n_slots: int = typer.Option(8, "--n-slots", help="Slot count N"),
    tagger: str = typer.Option("lexicon", "--tagger", help="POS tagger id"),
    oversize: str = typer.Option("reject", "--oversize", help="reject or truncate graphs larger than N"),
):
    """
    Extract order, copy and POS supervision

    Examples:
        graphscribe preprocess data/train.jsonl data/dev.jsonl -o sup/
        graphscribe preprocess webnlg.json --format webnlg-json --n-slots 7 -o sup/
    """
    with handle_errors():
        preprocess_cmd.preprocess_datasets(inputs, output_dir, format, n_slots, tagger, oversize)


@app.command()
def train(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Experiment config YAML"),
    train_file: Optional[Path] = typer.Option(None, "--train", help="Training sidecar"),
    validation: Optional[Path] = typer.Option(None, "--validation", help="Validation sidecar"),
    epochs: Optional[int] = typer.Option(None, "--epochs", help="Training epochs"),
    batch_size: Optional[int] = typer.Option(None, "--batch-size", help="Batch size"),
    learning_rate: Optional[float] = typer.Option(None, "--learning-rate", help="Peak learning rate"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Random seed"),
    order_mode: Optional[str] = typer.Option(None, "--order-mode", help="learned, node_level, random, gold or input"),
    window_size: Optional[int] = typer.Option(None, "--window-size", help="Semantic window size"),
    pos_scope: Optional[str] = typer.Option(None, "--pos-scope", help="local or global"),
    no_cp: bool = typer.Option(False, "--no-cp", help="Disable copying"),
    no_pos: bool = typer.Option(False, "--no-pos", help="Remove POS from the copy gate"),
    no_sc: bool = typer.Option(False, "--no-sc", help="Remove semantic context from the copy gate"),
    run_dir: Optional[Path] = typer.Option(None, "--run-dir", help="Run directory"),
    device: str = typer.Option(settings.runtime.device, "--device", help="Torch device"),
):
    """
    Train a model

    Examples:
        graphscribe train -c configs/default.yaml
        graphscribe train --train sup/train.sup.jsonl --epochs 5 --no-cp
    """
    overrides = {
        "data.train": str(train_file) if train_file else None,
        "data.validation": str(validation) if validation else None,
        "train.epochs": epochs,
        "train.batch_size": batch_size,
        "train.learning_rate": learning_rate,
        "train.seed": seed,
        "train.ablation.order_mode": order_mode,
        "train.ablation.no_cp": True if no_cp else None,
        "train.ablation.no_pos": True if no_pos else None,
        "train.ablation.no_sc": True if no_sc else None,
        "model.window_size": window_size,
        "model.pos_scope": pos_scope,
    }
    with handle_errors():
        train_cmd.train_model(config, overrides, run_dir, device)


@app.command()
def generate(
    checkpoint: Path = typer.Argument(..., help="Checkpoint file"),
    input_path: Path = typer.Argument(..., help="Graphs JSONL or supervision sidecar"),
    run_dir: Optional[Path] = typer.Option(None, "--run-dir", help="Run directory"),
    order_mode: str = typer.Option("learned", "--order-mode", help="learned, node_level, random, gold or input"),
    beam: int = typer.Option(5, "--beam", help="Beam width"),
    threshold: Optional[float] = typer.Option(None, "--threshold", help="Copy threshold"),
    max_len: Optional[int] = typer.Option(None, "--max-len", help="Maximum output tokens"),
    seed: int = typer.Option(settings.runtime.seed, "--seed", help="Seed for random ordering"),
    device: str = typer.Option(settings.runtime.device, "--device", help="Torch device"),
):
    """
    Generate text for graphs

    Examples:
        graphscribe generate runs/train-x/checkpoint.pt graphs.jsonl
        graphscribe generate ckpt.pt sup/test.sup.jsonl --order-mode gold --beam 1
    """
    with handle_errors():
        generate_cmd.generate_text(
            checkpoint, input_path, run_dir, order_mode, beam, threshold, max_len, device, seed
        )


@app.command()
def evaluate(
    checkpoint: Path = typer.Argument(..., help="Checkpoint file"),
    split: Path = typer.Argument(..., help="Supervision sidecar to score"),
    run_dir: Optional[Path] = typer.Option(None, "--run-dir", help="Run directory"),
    order_mode: str = typer.Option("learned", "--order-mode", help="learned, node_level, random, gold or input"),
    beam: int = typer.Option(5, "--beam", help="Beam width"),
    threshold: Optional[float] = typer.Option(None, "--threshold", help="Copy threshold"),
    max_len: Optional[int] = typer.Option(None, "--max-len", help="Maximum output tokens"),
    seed: int = typer.Option(settings.runtime.seed, "--seed", help="Seed for random ordering"),
    tsv: bool = typer.Option(True, "--tsv/--no-tsv", help="Write per-example TSV"),
    device: str = typer.Option(settings.runtime.device, "--device", help="Torch device"),
):
    """
    Score a checkpoint with BLEU-4, ROUGE-L, chrF++, CIDEr and order metrics

    Examples:
        graphscribe evaluate ckpt.pt sup/test.sup.jsonl
        graphscribe evaluate ckpt.pt sup/test.sup.jsonl --order-mode gold --no-tsv
    """
    with handle_errors():
        evaluate_cmd.evaluate_checkpoint(
            checkpoint, split, run_dir, order_mode, beam, threshold, max_len, device, seed, tsv
        )


@app.command()
def ablate(
    suite: str = typer.Argument(..., help="copy, order, window or pos_scope"),
    seeds: str = typer.Option("13,14,15", "--seeds", help="Comma-separated seeds"),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Experiment config YAML"),
    output_dir: Optional[Path] = typer.Option(None, "--output-dir", "-o", help="Output directory"),
    beam: int = typer.Option(5, "--beam", help="Beam width"),
    variants: Optional[List[str]] = typer.Option(None, "--variant", help="Restrict to these variants"),
    synthetic: Optional[int] = typer.Option(None, "--synthetic", help="Use a synthetic corpus of N examples"),
    corpus_seed: int = typer.Option(0, "--corpus-seed", help="Synthetic corpus seed"),
    epochs: Optional[int] = typer.Option(None, "--epochs", help="Training epochs per run"),
    device: str = typer.Option(settings.runtime.device, "--device", help="Torch device"),
):
    """
    Run an ablation suite

    Examples:
        graphscribe ablate copy -c configs/default.yaml --seeds 13,14,15
        graphscribe ablate order --synthetic 400 --epochs 3
    """
    with handle_errors():
        ablate_cmd.run_ablation(
            suite, parse_seeds(seeds), config, output_dir, beam, variants or None,
            synthetic, corpus_seed, epochs, device,
        )


@app.command()
def plot(
    kind: str = typer.Argument(..., help="window or sizes"),
    csv_path: Path = typer.Argument(..., help="Ablation rows (window) or size bucket CSV (sizes)"),
    output: Path = typer.Option(..., "--output", "-o", help="PNG path"),
    metric: str = typer.Option("bleu4", "--metric", help="Metric column for window sweeps"),
):
    """
    Plot a window-size or graph-size sweep

    Examples:
        graphscribe plot window runs/ablate/ablation_window.csv -o window.png
        graphscribe plot sizes runs/ablate/ablation_order_buckets.csv -o sizes.png
    """
    with handle_errors():
        plot_cmd.render_plot(kind, csv_path, output, metric)


@app.command()
def convert(
    input_path: Path = typer.Argument(..., help="WebNLG or DART release file"),
    format: str = typer.Option(..., "--format", help="webnlg-json or dart-json"),
    output: Path = typer.Option(..., "--output", "-o", help="Canonical JSONL output"),
):
    """
    Convert a dataset release into canonical JSONL
    """
    with handle_errors():
        convert_cmd.convert_file(input_path, format, output)


@app.command()
def synthesize(
    output_dir: Path = typer.Argument(..., help="Directory for train/validation/test JSONL"),
    n_examples: int = typer.Option(200, "--n-examples", "-n", help="Number of examples"),
    kind: str = typer.Option("star", "--kind", help="star or ordered"),
    seed: int = typer.Option(0, "--seed", help="Corpus seed"),
    max_triplets: int = typer.Option(4, "--max-triplets", help="Largest graph size"),
):
    """
    Write a synthetic corpus for smoke tests and sanity ablations
    """
    with handle_errors():
        synthesize_cmd.synthesize_corpus(output_dir, n_examples, kind, seed, max_triplets)


@app.command()
def version():
    """Show version information"""
    from graphscribe import __version__

    print_panel(
        f"[bold cyan]Graphscribe[/bold cyan] v{__version__}\n[dim]Knowledge-graph-to-text generation[/dim]",
        title="Version",
    )


if __name__ == "__main__":
    app()
