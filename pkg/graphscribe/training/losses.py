"""
Joint objective.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import torch

from graphscribe.models.config import AblationFlags

DEFAULT_WEIGHTS = (0.7, 0.4, 0.3)


@dataclass
class LossBundle:
    """
    Component losses, the effective weights applied to them, and their sum:
    ``l_total = l_token + w_pos * l_pos + w_sort * l_sort + w_copy * l_copy``.
    Removed terms carry weight 0.
    """
    l_token: torch.Tensor
    l_pos: torch.Tensor
    l_sort: torch.Tensor
    l_copy: torch.Tensor
    w_pos: float
    w_sort: float
    w_copy: float
    l_total: torch.Tensor

    def to_dict(self) -> Dict[str, float]:
        return {
            "l_token": float(self.l_token),
            "l_pos": float(self.l_pos),
            "l_sort": float(self.l_sort),
            "l_copy": float(self.l_copy),
            "w_pos": self.w_pos,
            "w_sort": self.w_sort,
            "w_copy": self.w_copy,
            "l_total": float(self.l_total),
        }

    def is_finite(self) -> bool:
        return bool(torch.isfinite(self.l_total))


def total_loss(
    l_token: torch.Tensor,
    l_pos: Optional[torch.Tensor] = None,
    l_sort: Optional[torch.Tensor] = None,
    l_copy: Optional[torch.Tensor] = None,
    weights: Tuple[float, float, float] = DEFAULT_WEIGHTS,
    ablation: Optional[AblationFlags] = None,
) -> LossBundle:
    """
    Weighted sum of the four losses.

    A term whose effective weight is zero (or that is missing, or removed by
    an ablation flag) is left out of the graph entirely, so the parameters
    only it reaches get no gradient.
    """
    w_pos, w_sort, w_copy = (float(w) for w in weights)
    if min(w_pos, w_sort, w_copy) < 0:
        raise ValueError(f"Loss weights must be non-negative, got {weights}")
    if ablation is not None and ablation.no_cp:
        w_copy = 0.0

    zero = torch.zeros((), dtype=l_token.dtype, device=l_token.device)
    total = l_token
    components = []
    for value, weight in ((l_pos, w_pos), (l_sort, w_sort), (l_copy, w_copy)):
        if value is None or weight == 0.0:
            components.append((zero if value is None else value.detach(), 0.0))
            continue
        total = total + weight * value
        components.append((value, weight))

    (l_pos_v, w_pos), (l_sort_v, w_sort), (l_copy_v, w_copy) = components
    return LossBundle(
        l_token=l_token,
        l_pos=l_pos_v,
        l_sort=l_sort_v,
        l_copy=l_copy_v,
        w_pos=w_pos,
        w_sort=w_sort,
        w_copy=w_copy,
        l_total=total,
    )
