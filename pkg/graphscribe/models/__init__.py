"""
Neural components: sorter, encoder-decoder with POS fusion, copy gate.
"""

from graphscribe.models.config import AblationFlags, ModelConfig, OrderMode, PosScope
from graphscribe.models.copy_gate import (
    CopyDecision,
    CopyGate,
    GateScores,
    SemanticScorer,
    blend,
    context_window,
    context_windows,
    copy_loss,
    select_token,
)
from graphscribe.models.model import DecoderState, DecodeStep, GraphToTextModel, ModelOutput
from graphscribe.models.ordering import resolve_order
from graphscribe.models.seq2seq import FusionLayer, pos_loss, token_loss
from graphscribe.models.sorting import (
    NodeSortingNetwork,
    SortingNetwork,
    TripletEncoder,
    decode_order,
    hash_graph,
    sort_loss,
)

__all__ = [
    "AblationFlags",
    "ModelConfig",
    "OrderMode",
    "PosScope",
    "CopyDecision",
    "CopyGate",
    "GateScores",
    "SemanticScorer",
    "blend",
    "context_window",
    "context_windows",
    "copy_loss",
    "select_token",
    "DecoderState",
    "DecodeStep",
    "GraphToTextModel",
    "ModelOutput",
    "resolve_order",
    "FusionLayer",
    "pos_loss",
    "token_loss",
    "NodeSortingNetwork",
    "SortingNetwork",
    "TripletEncoder",
    "decode_order",
    "hash_graph",
    "sort_loss",
]
