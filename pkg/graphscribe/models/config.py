"""
Model configuration schemas.
"""

from __future__ import annotations

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator


class OrderMode(str, Enum):
    """Where the linearization order comes from."""
    LEARNED = "learned"
    NODE_LEVEL = "node_level"
    RANDOM = "random"
    GOLD = "gold"
    INPUT = "input"


class PosScope(str, Enum):
    LOCAL = "local"
    GLOBAL = "global"


class AblationFlags(BaseModel):
    """Switches that remove parts of the model."""
    no_cp: bool = Field(False, description="Disable copying: pure generation, no copy loss")
    no_pos: bool = Field(False, description="Remove the POS embedding from the copy gate")
    no_pos_fusion: bool = Field(False, description="Skip fusing POS encoder states into word states")
    no_sc: bool = Field(False, description="Drop semantic context scoring from the copy probability")
    order_mode: OrderMode = OrderMode.LEARNED

    def describe(self) -> str:
        parts = [name for name in ("no_cp", "no_pos", "no_pos_fusion", "no_sc") if getattr(self, name)]
        parts.append(f"order={self.order_mode.value}")
        return ",".join(parts)


class ModelConfig(BaseModel):
    """Sizes and behaviour of the generator, sorter and copy gate."""

    # transformer
    d_model: int = 128
    n_layers: int = 2
    n_decoder_layers: int = 2
    n_heads: int = 4
    d_ff: int = 256
    dropout: float = 0.1
    max_source_len: int = 256
    max_target_len: int = 64
    relative_window: int = 16
    overlong: str = Field("truncate", description="truncate or error for sources longer than max_source_len")

    # vocabulary sizes are filled in from the data
    vocab_size: int = 0
    tagset: str = "coarse"
    tagset_size: int = 0

    # sorter
    n_slots: int = 8
    embed_dim: int = 32
    sorter_hidden: int = 256
    hash_buckets: int = 4096
    assignment: str = Field("greedy", description="greedy or optimal permutation repair")

    # copy gate
    window_size: int = 3
    window_ensemble: List[int] = Field(default_factory=list)
    scorer_hidden: Optional[int] = 64
    copy_lambda: float = 0.3
    copy_threshold: float = 0.5
    pos_scope: PosScope = PosScope.LOCAL

    @field_validator(
        "d_model", "n_layers", "n_decoder_layers", "n_heads", "d_ff",
        "max_source_len", "max_target_len", "relative_window",
        "n_slots", "embed_dim", "sorter_hidden", "hash_buckets", "window_size",
    )
    @classmethod
    def positive(cls, value: int) -> int:
        if value <= 0:
            raise ValueError("must be positive")
        return value

    @field_validator("copy_lambda")
    @classmethod
    def lambda_in_range(cls, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError("copy_lambda must be in [0, 1]")
        return value

    @field_validator("overlong")
    @classmethod
    def overlong_policy(cls, value: str) -> str:
        if value not in ("truncate", "error"):
            raise ValueError("overlong must be 'truncate' or 'error'")
        return value

    @field_validator("assignment")
    @classmethod
    def assignment_method(cls, value: str) -> str:
        if value not in ("greedy", "optimal"):
            raise ValueError("assignment must be 'greedy' or 'optimal'")
        return value

    @field_validator("window_ensemble")
    @classmethod
    def ensemble_sizes(cls, value: List[int]) -> List[int]:
        if any(w <= 0 for w in value):
            raise ValueError("window sizes must be positive")
        return sorted(set(value))

    @model_validator(mode="after")
    def heads_divide_width(self) -> "ModelConfig":
        if self.d_model % self.n_heads != 0:
            raise ValueError(f"d_model {self.d_model} is not divisible by n_heads {self.n_heads}")
        return self

    @property
    def window_sizes(self) -> List[int]:
        """Window sizes scored by the semantic scorer (ensemble when configured)."""
        return self.window_ensemble or [self.window_size]

    @property
    def slot_dim(self) -> int:
        return 4 * self.embed_dim
