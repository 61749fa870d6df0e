"""
Synthesize Command - Write synthetic corpora as canonical JSONL splits
"""

from pathlib import Path
from typing import Dict

from graphscribe.cli.utils import success
from graphscribe.data.datasets import write_jsonl
from graphscribe.errors import ConfigError
from graphscribe.experiments.synthetic import feature_ordered_graphs, split_corpus, synthetic_corpus

CORPUS_KINDS = ("star", "ordered")


def synthesize_corpus(
    output_dir: Path, n_examples: int, kind: str = "star", seed: int = 0, max_triplets: int = 4
) -> Dict[str, Path]:
    """Write ``train.jsonl``, ``validation.jsonl`` and ``test.jsonl`` under ``output_dir``."""
    if n_examples < 1:
        raise ConfigError("The corpus needs at least one example")
    if kind == "star":
        examples = synthetic_corpus(n_examples, seed=seed, max_triplets=max_triplets)
    elif kind == "ordered":
        examples = feature_ordered_graphs(n_examples, seed=seed, max_triplets=max_triplets)
    else:
        raise ConfigError(f"Unknown corpus kind '{kind}'. Available: {', '.join(CORPUS_KINDS)}")

    paths = {}
    for split, items in split_corpus(examples).items():
        path = Path(output_dir) / f"{split}.jsonl"
        write_jsonl(items, path)
        paths[split] = path
        success(f"{split}: {len(items)} examples -> {path}")
    return paths
