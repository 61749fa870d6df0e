"""
Unit tests for beam search, greedy decoding and generation.
"""

import itertools
import json
import math

import numpy as np
import pytest

from conftest import BigramSession
from graphscribe.data.graph import linearize
from graphscribe.data.types import OrderLabel
from graphscribe.errors import DataError
from graphscribe.evaluation.decoding import (
    Hypothesis,
    ModelSession,
    beam_search,
    generate,
    greedy_decode,
    write_traces,
)


class TestBeamSearch:

    @pytest.mark.unit
    def test_exhaustive_beam_finds_best(self, bigram_session):
        result = beam_search(bigram_session, beam=16, max_len=2)
        assert result.best.tokens == [1, 2]
        assert result.best.normalized() == pytest.approx(math.log(0.3) / 2, abs=1e-6)
        assert result.best.normalized() == pytest.approx(-0.602, abs=1e-3)

    @pytest.mark.unit
    def test_beam_of_one_is_greedy(self, bigram_session):
        result = beam_search(bigram_session, beam=1, max_len=3)
        assert result.best.tokens == [1, 2, 3]
        assert result.best.finished

    @pytest.mark.unit
    def test_hypotheses_are_ranked(self, bigram_session):
        result = beam_search(bigram_session, beam=16, max_len=2)
        scores = [h.normalized() for h in result.hypotheses]
        assert scores == sorted(scores, reverse=True)
        assert result.best is result.hypotheses[0]

    @pytest.mark.unit
    def test_ties_go_to_lower_token(self):
        session = BigramSession({0: {1: 0.4, 2: 0.4, 3: 0.2}, 1: {3: 1.0}, 2: {3: 1.0}})
        assert beam_search(session, beam=2, max_len=2).best.tokens == [1, 3]

    @pytest.mark.unit
    def test_non_finite_options_are_skipped(self):
        session = BigramSession({0: {1: 0.0, 2: 1.0}, 2: {3: 1.0}})
        result = beam_search(session, beam=2, max_len=3)
        assert result.best.tokens == [2, 3]
        assert all(1 not in h.tokens for h in result.hypotheses)

    @pytest.mark.unit
    def test_stops_when_nothing_is_alive(self):
        session = BigramSession({0: {3: 0.9, 1: 0.1}, 1: {1: 1.0}})
        beam_search(session, beam=1, max_len=10)
        assert session.calls == 1

    @pytest.mark.unit
    def test_early_finishers_do_not_end_the_search(self):
        session = BigramSession({0: {1: 0.6, 3: 0.4}, 1: {2: 0.55, 3: 0.45}, 2: {2: 1.0}})
        result = beam_search(session, beam=2, max_len=6)
        assert result.best.tokens == [1, 2, 2, 2, 2, 2]
        assert result.best.normalized() == pytest.approx(math.log(0.33) / 6)
        assert session.calls == 6

    @pytest.mark.unit
    def test_best_score_never_drops_with_wider_beams(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            table = {last: dict(zip((1, 2, 3, 4), rng.dirichlet(np.ones(4)))) for last in (0, 1, 2, 4)}
            scores = [
                beam_search(BigramSession(table), beam=beam, max_len=5).best.normalized()
                for beam in range(1, 7)
            ]
            assert all(wide >= narrow for narrow, wide in zip(scores, scores[1:]))

    @pytest.mark.unit
    def test_invalid_beam(self, bigram_session):
        with pytest.raises(ValueError):
            beam_search(bigram_session, beam=0, max_len=3)

    @pytest.mark.unit
    def test_length_normalisation(self):
        hyp = Hypothesis(tokens=[1, 2, 3, 4], score=-2.0)
        assert hyp.normalized() == pytest.approx(-0.5)
        assert hyp.normalized(alpha=0.0) == pytest.approx(-2.0)
        assert Hypothesis().normalized() == 0.0


class TestModelDecoding:

    @pytest.fixture
    def lin(self, awh_graph, synthetic_vocab):
        return linearize(awh_graph, OrderLabel.from_listing((2, 0, 1), 4), synthetic_vocab)

    @pytest.mark.unit
    def test_beam_of_one_matches_greedy(self, tiny_model, lin, synthetic_vocab):
        greedy = greedy_decode(ModelSession(tiny_model, lin, synthetic_vocab, max_len=8), 8)
        beam = beam_search(ModelSession(tiny_model, lin, synthetic_vocab, max_len=8), 1, 8).best
        assert beam.tokens == greedy.tokens
        assert beam.score == pytest.approx(greedy.score, abs=1e-5)

    @pytest.mark.unit
    @pytest.mark.parametrize("threshold", [0.0, 0.5, 2.0])
    def test_best_score_never_drops_with_wider_beams(self, tiny_model, lin, synthetic_vocab, threshold):
        scores = []
        for beam in range(1, 6):
            session = ModelSession(tiny_model, lin, synthetic_vocab, threshold=threshold, max_len=8)
            scores.append(beam_search(session, beam, 8).best.normalized())
        for narrow, wide in zip(scores, scores[1:]):
            assert wide >= narrow - 1e-5
        assert scores[4] >= scores[0] - 1e-5

    @pytest.mark.unit
    def test_specials_are_never_generated(self, tiny_model, lin, synthetic_vocab):
        hyp = greedy_decode(ModelSession(tiny_model, lin, synthetic_vocab, threshold=2.0, max_len=8), 8)
        blocked = set(synthetic_vocab.special_ids) - {synthetic_vocab.eos_id}
        assert not blocked & set(hyp.tokens)

    @pytest.mark.unit
    def test_zero_threshold_always_copies(self, tiny_model, lin, synthetic_vocab):
        hyp = greedy_decode(ModelSession(tiny_model, lin, synthetic_vocab, threshold=0.0, max_len=6), 6)
        assert len(hyp.tokens) == 6
        assert all(decision.copied for decision in hyp.trace)
        copyable = {lin.surface[p] for p in lin.copyable_positions()}
        assert {decision.token for decision in hyp.trace} <= copyable

    @pytest.mark.unit
    def test_generate_records_order_and_trace(self, tiny_model, awh_graph, synthetic_vocab):
        generation = generate(tiny_model, awh_graph, synthetic_vocab, order_mode="input", beam=2, max_len=6)
        assert generation.id == "awh"
        assert str(generation.order) == "0,1,2"
        assert len(generation.trace) >= len(generation.tokens)
        assert 0.0 <= generation.copy_rate <= 1.0
        assert generation.text == " ".join(generation.tokens)

    @pytest.mark.unit
    def test_no_copy_above_one(self, tiny_model, awh_graph, synthetic_vocab):
        generation = generate(tiny_model, awh_graph, synthetic_vocab, "input", beam=1, max_len=5, threshold=1.01)
        assert generation.copy_rate == 0.0

    @pytest.mark.unit
    def test_random_mode_is_reproducible(self, tiny_model, awh_graph, synthetic_vocab):
        first = generate(tiny_model, awh_graph, synthetic_vocab, "random", beam=1, max_len=4,
                         rng=np.random.default_rng(3))
        second = generate(tiny_model, awh_graph, synthetic_vocab, "random", beam=1, max_len=4,
                          rng=np.random.default_rng(3))
        assert first.order == second.order
        assert first.tokens == second.tokens

    @pytest.mark.unit
    def test_gold_mode_needs_gold(self, tiny_model, awh_graph, synthetic_vocab):
        with pytest.raises(DataError):
            generate(tiny_model, awh_graph, synthetic_vocab, "gold", beam=1, max_len=4)

    @pytest.mark.unit
    def test_training_flag_is_restored(self, tiny_model, awh_graph, synthetic_vocab):
        tiny_model.train()
        generate(tiny_model, awh_graph, synthetic_vocab, "input", beam=1, max_len=3)
        assert tiny_model.training

    @pytest.mark.unit
    def test_write_traces(self, tiny_model, awh_graph, synthetic_vocab, tmp_path):
        generation = generate(tiny_model, awh_graph, synthetic_vocab, "input", beam=1, max_len=4)
        path = tmp_path / "traces.jsonl"
        write_traces([generation], path)
        rows = [json.loads(line) for line in path.read_text().splitlines()]
        assert len(rows) == len(generation.trace)
        assert [r["step"] for r in rows] == list(range(len(rows)))
        assert {"t_copy", "x_semantic", "p_copy", "source", "token"} <= set(rows[0])


def exhaustive_best(session, max_len):
    """Best complete sequence by normalised score: ends in <eos> or reaches max_len."""
    tokens = sorted({t for row in session.table.values() for t in row})
    best = None
    for length in range(1, max_len + 1):
        for sequence in itertools.product(tokens, repeat=length):
            if session.eos_id in sequence[:-1]:
                continue
            if length < max_len and sequence[-1] != session.eos_id:
                continue
            last, score = session.bos_id, 0.0
            for token in sequence:
                score += session.log_prob(last, token) if token in session.table.get(last, {}) else -math.inf
                last = token
            candidate = Hypothesis(tokens=list(sequence), score=score)
            if best is None or candidate.normalized() > best.normalized():
                best = candidate
    return best


class TestAgainstExhaustiveSearch:

    @pytest.mark.unit
    def test_beam_of_four_matches_exhaustive(self, bigram_session):
        oracle = exhaustive_best(BigramSession(), max_len=3)
        result = beam_search(bigram_session, beam=4, max_len=3)
        assert oracle.tokens == [1, 2, 3]
        assert result.best.tokens == oracle.tokens
        assert result.best.normalized() == pytest.approx(oracle.normalized())
