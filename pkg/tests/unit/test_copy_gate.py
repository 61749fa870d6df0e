"""
Unit tests for the copy gate, its semantic windows and copy selection.
"""

import pytest
import torch

from graphscribe.data.graph import linearize, linearized_tokens
from graphscribe.data.types import OrderLabel
from graphscribe.errors import ConfigError
from graphscribe.models.copy_gate import (
    CopyGate,
    GateScores,
    blend,
    context_window,
    context_windows,
    copy_candidate,
    copy_loss,
    copy_weights,
    select_token,
)
from graphscribe.supervision.vocab import build_vocab


@pytest.fixture
def vocab(awh_graph):
    return build_vocab([linearized_tokens(awh_graph) + ["was", "in"]])


@pytest.fixture
def lin(awh_graph, vocab):
    return linearize(awh_graph, OrderLabel.from_listing((2, 0, 1)), vocab)


class TestWindows:

    @pytest.mark.unit
    def test_windows_pad_the_start(self):
        embeddings = torch.arange(1.0, 4.0).view(1, 3, 1)
        pad = torch.zeros(1)
        windows = context_windows(embeddings, 2, pad)
        assert windows.shape == (1, 3, 2)
        assert windows[0].tolist() == [[0.0, 1.0], [1.0, 2.0], [2.0, 3.0]]

    @pytest.mark.unit
    def test_window_of_one_is_the_step(self):
        embeddings = torch.randn(2, 4, 3)
        assert torch.equal(context_windows(embeddings, 1, torch.zeros(3)), embeddings)

    @pytest.mark.unit
    def test_single_window_matches_batch(self):
        embeddings = torch.randn(5, 3)
        pad = torch.full((3,), -1.0)
        all_windows = context_windows(embeddings.unsqueeze(0), 3, pad)[0]
        for k in range(5):
            assert torch.equal(context_window(embeddings, k, 3, pad), all_windows[k])

    @pytest.mark.unit
    def test_invalid_window(self):
        with pytest.raises(ValueError):
            context_windows(torch.randn(1, 2, 3), 0, torch.zeros(3))


class TestGate:

    @pytest.mark.unit
    def test_blend(self):
        t_copy = torch.tensor([0.2])
        x_sem = torch.tensor([0.8])
        assert blend(t_copy, x_sem, 0.3).item() == pytest.approx(0.3 * 0.8 + 0.7 * 0.2)
        assert torch.equal(blend(t_copy, x_sem, 0.0), t_copy)
        assert torch.equal(blend(t_copy, x_sem, 1.0), x_sem)

    @pytest.mark.unit
    @pytest.mark.parametrize("lam", [-0.1, 1.5])
    def test_lambda_out_of_range(self, lam):
        with pytest.raises(ConfigError):
            blend(torch.zeros(1), torch.zeros(1), lam)
        with pytest.raises(ConfigError):
            CopyGate(4, lam=lam)

    @pytest.mark.unit
    def test_scores_are_probabilities(self):
        torch.manual_seed(0)
        gate = CopyGate(4, window_sizes=(2, 3), scorer_hidden=8)
        v = torch.randn(2, 5, 4)
        scores = gate(v, torch.randn(2, 5, 4), torch.randn(2, 5, 4), v, torch.zeros(4))
        for tensor in (scores.t_copy, scores.x_semantic, scores.p_copy):
            assert tensor.shape == (2, 5)
            assert torch.all((tensor > 0) & (tensor < 1))
        assert torch.allclose(scores.p_copy, 0.3 * scores.x_semantic + 0.7 * scores.t_copy)

    @pytest.mark.unit
    def test_without_semantic_context(self):
        gate = CopyGate(4, use_semantic=False)
        v = torch.randn(1, 3, 4)
        scores = gate(v, v, v, v, torch.zeros(4))
        assert scores.x_semantic is None
        assert torch.equal(scores.p_copy, scores.t_copy)

    @pytest.mark.unit
    def test_without_pos_ignores_tag_embedding(self):
        torch.manual_seed(0)
        gate = CopyGate(4, use_pos=False)
        v_w, s = torch.randn(1, 3, 4), torch.randn(1, 3, 4)
        first = gate.gate_score(v_w, torch.randn(1, 3, 4), s)
        second = gate.gate_score(v_w, torch.randn(1, 3, 4), s)
        assert torch.equal(first, second)

    @pytest.mark.unit
    def test_linear_scorer(self):
        gate = CopyGate(4, window_sizes=(2,), scorer_hidden=None)
        v = torch.randn(1, 3, 4)
        assert gate(v, v, v, v, torch.zeros(4)).x_semantic.shape == (1, 3)


class TestCopyLoss:

    @pytest.mark.unit
    def test_value(self):
        p = torch.tensor([[0.8, 0.4, 0.5]])
        labels = torch.tensor([[1.0, 0.0, 1.0]])
        mask = torch.tensor([[True, True, False]])
        expected = -(torch.log(torch.tensor(0.8)) + torch.log(torch.tensor(0.6)))
        assert copy_loss(p, labels, mask).item() == pytest.approx(expected.item(), rel=1e-5)

    @pytest.mark.unit
    def test_extremes_stay_finite(self):
        p = torch.tensor([[0.0, 1.0]])
        labels = torch.tensor([[1.0, 0.0]])
        loss = copy_loss(p, labels, torch.ones(1, 2, dtype=torch.bool))
        assert torch.isfinite(loss)

    @pytest.mark.unit
    def test_gradient_check(self):
        torch.manual_seed(0)
        logits = torch.randn(2, 4, dtype=torch.float64, requires_grad=True)
        labels = torch.tensor([[1, 0, 1, 0], [0, 0, 1, 1]], dtype=torch.float64)
        mask = torch.tensor([[True, True, True, False], [True, True, True, True]])
        assert torch.autograd.gradcheck(lambda x: copy_loss(torch.sigmoid(x), labels, mask), (logits,))


class TestSelection:

    @pytest.mark.unit
    def test_candidate_skips_markers(self, lin):
        attention = torch.zeros(len(lin))
        attention[0] = 1.0  # <Head> marker
        attention[7] = 0.5  # Kuttikkattoor
        candidate = copy_candidate(attention, lin)
        assert candidate.position == 7
        assert candidate.token == "Kuttikkattoor"
        assert candidate.triplet == 2

    @pytest.mark.unit
    def test_ties_go_to_lower_index(self, lin):
        candidate = copy_candidate(torch.full((len(lin),), 0.1), lin)
        assert candidate.position == lin.copyable_positions()[0]

    @pytest.mark.unit
    def test_copy_above_threshold(self, lin, vocab):
        attention = torch.zeros(len(lin))
        attention[7] = 1.0
        scores = GateScores(torch.tensor(0.9), torch.tensor(0.7), torch.tensor(0.84))
        decision = select_token(torch.zeros(len(vocab)), attention, scores, lin, vocab, threshold=0.5)
        assert decision.copied
        assert decision.token == "Kuttikkattoor"
        assert decision.source_position == 7
        assert decision.to_dict()["source"] == "copied"

    @pytest.mark.unit
    def test_generate_below_threshold(self, lin, vocab):
        logits = torch.zeros(len(vocab))
        logits[vocab.id_of("was")] = 5.0
        scores = GateScores(torch.tensor(0.1), None, torch.tensor(0.1))
        decision = select_token(logits, torch.ones(len(lin)), scores, lin, vocab)
        assert not decision.copied
        assert decision.token == "was"
        assert decision.x_semantic is None

    @pytest.mark.unit
    def test_no_gate_means_generate(self, lin, vocab):
        decision = select_token(torch.zeros(len(vocab)), torch.ones(len(lin)), None, lin, vocab)
        assert decision.source == "generated"
        assert decision.p_copy is None


class TestCopyWeights:

    @pytest.fixture
    def positions(self, lin):
        right = lin.surface.index("Kuttikkattoor")
        wrong = next(p for p in lin.copyable_positions() if lin.ids[p] != lin.ids[right])
        return right, wrong

    @pytest.mark.unit
    def test_word_distribution_overrides_attention(self, lin, vocab, positions):
        right, wrong = positions
        attention = torch.zeros(len(lin))
        attention[wrong] = 0.6
        attention[right] = 0.4
        logits = torch.zeros(len(vocab))
        logits[lin.ids[right]] = 4.0

        assert copy_candidate(attention, lin).position == wrong
        candidate = copy_candidate(attention, lin, logits)
        assert candidate.position == right
        assert candidate.token == "Kuttikkattoor"
        assert candidate.attention == pytest.approx(0.4)
        assert candidate.weight > 0.5

    @pytest.mark.unit
    def test_select_token_copies_the_supported_entity(self, lin, vocab, positions):
        right, wrong = positions
        attention = torch.zeros(len(lin))
        attention[wrong] = 0.9
        attention[right] = 0.1
        logits = torch.zeros(len(vocab))
        logits[lin.ids[right]] = 6.0
        scores = GateScores(torch.tensor(0.9), None, torch.tensor(0.9))
        decision = select_token(torch.zeros(len(vocab)), attention, scores, lin, vocab, copy_logits=logits)
        assert decision.copied
        assert decision.source_position == right

    @pytest.mark.unit
    def test_weights_form_a_distribution_over_copyable_positions(self, lin, vocab):
        torch.manual_seed(0)
        weights = copy_weights(torch.rand(len(lin)), lin, torch.randn(len(vocab)))
        copyable = set(lin.copyable_positions())
        assert weights.sum() == pytest.approx(1.0)
        assert all(weights[p] == 0.0 for p in range(len(lin)) if p not in copyable)

    @pytest.mark.unit
    def test_uniform_word_logits_leave_attention_in_charge(self, lin, vocab):
        attention = torch.zeros(len(lin))
        attention[lin.copyable_positions()[-1]] = 1.0
        weights = copy_weights(attention, lin, torch.zeros(len(vocab)))
        assert int(weights.argmax()) == lin.copyable_positions()[-1]

    @pytest.mark.unit
    def test_falls_back_to_attention_without_word_mass(self, lin, vocab):
        attention = torch.zeros(len(lin))
        attention[7] = 1.0
        logits = torch.full((len(vocab),), -float("inf"))
        logits[vocab.id_of("was")] = 0.0
        candidate = copy_candidate(attention, lin, logits)
        assert candidate.position == 7

    @pytest.mark.unit
    def test_unknown_entity_takes_the_leftover_word_mass(self, awh_graph):
        known = [t for t in linearized_tokens(awh_graph) if t != "kuttikkattoor"]
        vocab = build_vocab([known + ["was", "in"]])
        lin = linearize(awh_graph, OrderLabel.from_listing((2, 0, 1)), vocab)
        unknown = lin.surface.index("Kuttikkattoor")
        india = lin.surface.index("India")
        assert lin.ids[unknown] == vocab.unk_id

        attention = torch.zeros(len(lin))
        attention[india] = 0.6
        attention[unknown] = 0.4
        logits = torch.zeros(len(vocab))
        logits[vocab.id_of("was")] = 6.0

        assert copy_candidate(attention, lin, logits).position == india
        candidate = copy_candidate(attention, lin, logits, vocab.unk_id)
        assert candidate.position == unknown
        assert candidate.token == "Kuttikkattoor"
