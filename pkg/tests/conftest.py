"""
Test fixtures for graphscribe tests.
"""

import json
import math
from pathlib import Path
from typing import Dict, List, Optional

import pytest

from graphscribe.data.types import Example, KnowledgeGraph, Triplet
from graphscribe.evaluation.decoding import Expansion
from graphscribe.experiments.synthetic import synthetic_corpus
from graphscribe.models.config import ModelConfig
from graphscribe.supervision.sidecar import SupervisionRecord, build_supervision
from graphscribe.supervision.tagging import COARSE
from graphscribe.training.batching import build_record_vocab
from graphscribe.training.checkpoint import build_model
from graphscribe.training.config import DataConfig, ExperimentConfig, TrainConfig

AWH_TRIPLES = [
    ("AWH Engineering College", "COUNTRY", "India"),
    ("AWH Engineering College", "ESTABLISHED", "2001"),
    ("AWH Engineering College", "CITY", "Kuttikkattoor"),
]
AWH_TEXT = "AWH Engineering College in Kuttikkattoor , India was established in 2001 ."
AWH_COPY_LABELS = [1, 1, 1, 0, 1, 0, 1, 0, 0, 0, 1, 0]

TINY_SLOTS = 4


@pytest.fixture
def awh_graph() -> KnowledgeGraph:
    return KnowledgeGraph(tuple(Triplet(*t) for t in AWH_TRIPLES), id="awh")


@pytest.fixture
def awh_example(awh_graph) -> Example:
    return Example(graph=awh_graph, reference=AWH_TEXT)


@pytest.fixture
def awh_record(awh_example) -> SupervisionRecord:
    return build_supervision(awh_example, TINY_SLOTS, "lexicon", COARSE)


@pytest.fixture
def awh_jsonl(tmp_path) -> Path:
    """Single-example canonical dataset file."""
    path = tmp_path / "awh.jsonl"
    path.write_text(json.dumps({"id": "awh", "triples": AWH_TRIPLES, "text": AWH_TEXT}) + "\n")
    return path


def tiny_model_config(**overrides) -> ModelConfig:
    values = dict(
        d_model=8,
        n_layers=1,
        n_decoder_layers=1,
        n_heads=2,
        d_ff=16,
        dropout=0.0,
        max_source_len=128,
        max_target_len=24,
        relative_window=4,
        n_slots=TINY_SLOTS,
        embed_dim=4,
        sorter_hidden=16,
        hash_buckets=64,
        window_size=2,
        scorer_hidden=8,
    )
    values.update(overrides)
    return ModelConfig(**values)


def tiny_experiment_config(epochs: int = 2, **train_overrides) -> ExperimentConfig:
    train_values = dict(epochs=epochs, batch_size=4, seed=0, learning_rate=1e-2, warmup_fraction=0.0)
    train_values.update(train_overrides)
    return ExperimentConfig(
        data=DataConfig(n_slots=TINY_SLOTS),
        model=tiny_model_config(),
        train=TrainConfig(**train_values),
    )


@pytest.fixture
def tiny_config() -> ExperimentConfig:
    return tiny_experiment_config()


@pytest.fixture
def synthetic_examples() -> List[Example]:
    return synthetic_corpus(16, seed=3, max_triplets=3, entity_pool_size=60)


@pytest.fixture
def synthetic_records(synthetic_examples) -> List[SupervisionRecord]:
    return [build_supervision(e, TINY_SLOTS, "lexicon", COARSE) for e in synthetic_examples]


@pytest.fixture
def synthetic_vocab(synthetic_records, awh_record):
    return build_record_vocab(synthetic_records + [awh_record])


@pytest.fixture
def tiny_model(tiny_config, synthetic_vocab):
    import torch

    torch.manual_seed(0)
    model = build_model(tiny_config, synthetic_vocab, COARSE)
    model.eval()
    return model


class BigramSession:
    """
    Hand-built decoding session: scores depend only on the last token.
    Token 0 is <bos>, 3 is <eos>.
    """

    bos_id = 0
    eos_id: Optional[int] = 3

    TABLE: Dict[int, Dict[int, float]] = {
        0: {1: 0.5, 2: 0.3, 3: 0.2},
        1: {1: 0.1, 2: 0.6, 3: 0.3},
        2: {1: 0.2, 2: 0.2, 3: 0.6},
    }

    def __init__(self, table: Optional[Dict[int, Dict[int, float]]] = None):
        self.table = table or self.TABLE
        self.calls = 0

    def log_prob(self, last: int, token: int) -> float:
        p = self.table[last][token]
        return math.log(p) if p > 0 else float("-inf")

    def expand(self, parents, last_tokens, k):
        self.calls += 1
        out = []
        for last in last_tokens:
            options = sorted(self.table[last], key=lambda t: (-self.table[last][t], t))[:k]
            out.append([Expansion(token, self.log_prob(last, token)) for token in options])
        return out


@pytest.fixture
def bigram_session() -> BigramSession:
    return BigramSession()
