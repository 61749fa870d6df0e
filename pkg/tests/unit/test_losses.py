"""
Unit tests for the sequence losses and the joint objective.
"""

import pytest
import torch

from graphscribe.models.config import AblationFlags
from graphscribe.models.seq2seq import pos_loss, sequence_nll, token_loss
from graphscribe.training.losses import DEFAULT_WEIGHTS, total_loss


def ones():
    return [torch.tensor(1.0, requires_grad=True) for _ in range(4)]


class TestSequenceLoss:

    @pytest.mark.unit
    def test_sums_over_tokens(self):
        logits = torch.zeros(1, 3, 4)
        targets = torch.tensor([[1, 2, 0]])
        value = sequence_nll(logits, targets, ignore_index=0)
        assert value.item() == pytest.approx(2 * torch.log(torch.tensor(4.0)).item(), rel=1e-5)

    @pytest.mark.unit
    def test_token_and_pos_losses_ignore_padding(self):
        logits = torch.zeros(2, 2, 5)
        targets = torch.tensor([[3, 0], [0, 0]])
        assert token_loss(logits, targets, pad_id=0, reduction="none").tolist() == pytest.approx(
            [torch.log(torch.tensor(5.0)).item(), 0.0], rel=1e-5
        )
        assert pos_loss(logits, targets, pad_id=0, reduction="sum").item() == pytest.approx(
            torch.log(torch.tensor(5.0)).item(), rel=1e-5
        )

    @pytest.mark.unit
    def test_unknown_reduction(self):
        with pytest.raises(ValueError):
            sequence_nll(torch.zeros(1, 1, 2), torch.tensor([[1]]), 0, reduction="median")

    @pytest.mark.unit
    def test_gradient_check(self):
        torch.manual_seed(0)
        logits = torch.randn(2, 3, 4, dtype=torch.float64, requires_grad=True)
        targets = torch.tensor([[1, 3, 0], [2, 0, 0]])
        assert torch.autograd.gradcheck(lambda x: sequence_nll(x, targets, 0), (logits,))


class TestTotalLoss:

    @pytest.mark.unit
    def test_default_weights(self):
        assert DEFAULT_WEIGHTS == (0.7, 0.4, 0.3)
        bundle = total_loss(*ones())
        assert bundle.l_total.item() == pytest.approx(2.4)

    @pytest.mark.unit
    def test_no_cp_drops_the_copy_term(self):
        bundle = total_loss(*ones(), ablation=AblationFlags(no_cp=True))
        assert bundle.l_total.item() == pytest.approx(2.1)
        assert bundle.w_copy == 0.0

    @pytest.mark.unit
    def test_zero_weight_term_gets_no_gradient(self):
        l_token, l_pos, l_sort, l_copy = ones()
        bundle = total_loss(l_token, l_pos, l_sort, l_copy, weights=(0.7, 0.0, 0.3))
        bundle.l_total.backward()
        assert l_sort.grad is None
        assert l_pos.grad.item() == pytest.approx(0.7)

    @pytest.mark.unit
    def test_missing_terms(self):
        bundle = total_loss(torch.tensor(2.0))
        assert bundle.l_total.item() == pytest.approx(2.0)
        assert bundle.to_dict()["l_sort"] == 0.0
        assert bundle.to_dict()["w_sort"] == 0.0

    @pytest.mark.unit
    def test_log_identity(self):
        bundle = total_loss(torch.tensor(1.5), torch.tensor(0.5), torch.tensor(2.0), torch.tensor(0.25))
        logged = bundle.to_dict()
        recomputed = (
            logged["l_token"]
            + logged["w_pos"] * logged["l_pos"]
            + logged["w_sort"] * logged["l_sort"]
            + logged["w_copy"] * logged["l_copy"]
        )
        assert logged["l_total"] == pytest.approx(recomputed)

    @pytest.mark.unit
    def test_negative_weight(self):
        with pytest.raises(ValueError):
            total_loss(*ones(), weights=(0.7, -0.1, 0.3))

    @pytest.mark.unit
    def test_non_finite_detected(self):
        assert not total_loss(torch.tensor(float("nan"))).is_finite()
