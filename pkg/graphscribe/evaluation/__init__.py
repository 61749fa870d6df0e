"""
Evaluation Package
"""

from graphscribe.evaluation.decoding import (
    BeamResult,
    DecodingSession,
    Expansion,
    Generation,
    Hypothesis,
    ModelSession,
    beam_search,
    generate,
    greedy_decode,
    write_traces,
)
from graphscribe.evaluation.harness import EvaluationHarness, ExampleResult, MetricsReport, write_hypotheses
from graphscribe.evaluation.metrics import (
    bleu4,
    bucketed_bleu,
    chrf_pp,
    cider,
    order_metrics,
    rouge_l,
    sentence_bleu,
    size_bucket,
)

__all__ = [
    "BeamResult",
    "DecodingSession",
    "Expansion",
    "Generation",
    "Hypothesis",
    "ModelSession",
    "beam_search",
    "generate",
    "greedy_decode",
    "write_traces",
    "EvaluationHarness",
    "ExampleResult",
    "MetricsReport",
    "write_hypotheses",
    "bleu4",
    "bucketed_bleu",
    "chrf_pp",
    "cider",
    "order_metrics",
    "rouge_l",
    "sentence_bleu",
    "size_bucket",
]
