"""
Unit tests for the data model, padding and linearization.
"""

import pytest

from graphscribe.data.graph import check_order, fit_graph, linearize, linearized_tokens, pad_graph
from graphscribe.data.tokenizer import detokenize, normalize_whitespace, tokenize, tokenize_with_spacing
from graphscribe.data.types import (
    MARKER_PROVENANCE,
    PAD_CLASS,
    Example,
    KnowledgeGraph,
    OrderLabel,
    Triplet,
)
from graphscribe.errors import DataError, InvalidOrderError, OversizeGraphError
from graphscribe.supervision.vocab import build_vocab


@pytest.fixture
def awh_vocab(awh_graph):
    return build_vocab([linearized_tokens(awh_graph)])


class TestTokenizer:

    @pytest.mark.unit
    def test_lowercases_and_splits_punctuation(self):
        assert tokenize("Hello, World!") == ["hello", ",", "world", "!"]

    @pytest.mark.unit
    def test_keeps_case_when_asked(self):
        assert tokenize("Hello World", lower=False) == ["Hello", "World"]

    @pytest.mark.unit
    def test_spacing_round_trip(self):
        text = "Alan Bean (born 1932) was a test pilot."
        assert detokenize(tokenize_with_spacing(text)) == text

    @pytest.mark.unit
    def test_plain_strings_join_with_spaces(self):
        assert detokenize(["a", ",", "b"]) == "a , b"

    @pytest.mark.unit
    def test_normalize_whitespace(self):
        assert normalize_whitespace("  a \t b\n c ") == "a b c"


class TestTriplet:

    @pytest.mark.unit
    def test_normalizes_whitespace(self):
        triplet = Triplet("  AWH   College ", "CITY", "Kuttikkattoor")
        assert triplet.head == "AWH College"

    @pytest.mark.unit
    @pytest.mark.parametrize("fields", [("", "r", "t"), ("h", "  ", "t"), ("h", "r", "")])
    def test_empty_field_is_rejected(self, fields):
        with pytest.raises(DataError):
            Triplet(*fields)

    @pytest.mark.unit
    def test_graph_needs_triplets(self):
        with pytest.raises(DataError):
            KnowledgeGraph((), id="empty")

    @pytest.mark.unit
    def test_graph_entities_first_seen_order(self, awh_graph):
        assert awh_graph.entities() == ["AWH Engineering College", "India", "2001", "Kuttikkattoor"]


class TestExample:

    @pytest.mark.unit
    def test_tokens(self, awh_example):
        assert len(awh_example.tokens) == 12
        assert awh_example.id == "awh"

    @pytest.mark.unit
    def test_empty_reference_is_rejected(self, awh_graph):
        with pytest.raises(DataError):
            Example(graph=awh_graph, reference="   ")

    @pytest.mark.unit
    def test_pos_length_must_match_tokens(self, awh_graph):
        with pytest.raises(DataError):
            Example(graph=awh_graph, reference="a b c", pos_reference=("DET", "NOUN"))


class TestPadding:

    @pytest.mark.unit
    def test_pad_to_slots(self, awh_graph):
        padded = pad_graph(awh_graph, 5)
        assert padded.n_slots == 5
        assert padded.mask == (True, True, True, False, False)
        assert all(t.is_placeholder for t in padded.triplets[3:])
        assert padded.real_triplets() == awh_graph.triplets

    @pytest.mark.unit
    def test_exact_fit_has_no_placeholders(self, awh_graph):
        padded = pad_graph(awh_graph, 3)
        assert all(padded.mask)

    @pytest.mark.unit
    def test_oversize_graph_is_rejected(self, awh_graph):
        with pytest.raises(OversizeGraphError) as excinfo:
            pad_graph(awh_graph, 2)
        assert excinfo.value.n_triplets == 3
        assert excinfo.value.n_slots == 2

    @pytest.mark.unit
    def test_truncate_policy(self, awh_graph):
        fitted = fit_graph(awh_graph, 2, oversize="truncate")
        assert len(fitted) == 2
        assert fitted.triplets == awh_graph.triplets[:2]

    @pytest.mark.unit
    def test_reject_policy(self, awh_graph):
        with pytest.raises(OversizeGraphError):
            fit_graph(awh_graph, 2)


class TestOrderLabel:

    @pytest.mark.unit
    def test_ranks_and_listing_are_inverse(self):
        order = OrderLabel((1, 2, 0))
        assert order.listing() == (2, 0, 1)
        assert OrderLabel.from_listing((2, 0, 1)) == order
        assert str(order) == "2,0,1"

    @pytest.mark.unit
    def test_padding_slots(self):
        order = OrderLabel.from_listing((2, 0, 1), n_slots=5)
        assert order.ranks == (1, 2, 0, PAD_CLASS, PAD_CLASS)
        assert order.n_real == 3
        assert order.n_slots == 5

    @pytest.mark.unit
    def test_resize_drops_trailing_placeholders(self):
        order = OrderLabel.from_listing((1, 0), n_slots=6)
        assert order.resized(3).ranks == (1, 0, PAD_CLASS)
        assert order.resized(8).n_slots == 8

    @pytest.mark.unit
    def test_cannot_shrink_below_real(self):
        with pytest.raises(InvalidOrderError):
            OrderLabel((0, 1, 2)).resized(2)

    @pytest.mark.unit
    @pytest.mark.parametrize("ranks", [(0, 0), (1, 2), (0, 2, PAD_CLASS)])
    def test_non_permutation_is_rejected(self, ranks):
        with pytest.raises(InvalidOrderError):
            OrderLabel(ranks)

    @pytest.mark.unit
    def test_identity(self):
        assert OrderLabel.identity(3, 4).ranks == (0, 1, 2, PAD_CLASS)

    @pytest.mark.unit
    def test_check_order_against_graph(self, awh_graph):
        check_order(awh_graph, OrderLabel.from_listing((2, 0, 1), 4))
        with pytest.raises(InvalidOrderError):
            check_order(awh_graph, OrderLabel((0, 1, PAD_CLASS, PAD_CLASS)))
        with pytest.raises(InvalidOrderError):
            check_order(awh_graph, OrderLabel((0, 1)))


class TestLinearize:

    @pytest.mark.unit
    def test_follows_description_order(self, awh_graph, awh_vocab):
        lin = linearize(awh_graph, OrderLabel.from_listing((2, 0, 1)), awh_vocab)
        assert list(lin.surface[:8]) == [
            "<Head>", "AWH", "Engineering", "College", "<Relation>", "CITY", "<Tail>", "Kuttikkattoor",
        ]

    @pytest.mark.unit
    def test_provenance(self, awh_graph, awh_vocab):
        lin = linearize(awh_graph, OrderLabel.from_listing((2, 0, 1)), awh_vocab)
        assert lin.provenance[0] == MARKER_PROVENANCE
        assert set(lin.provenance[1:8]) == {MARKER_PROVENANCE, 2}
        for position in lin.copyable_positions():
            assert lin.surface[position] not in ("<Head>", "<Relation>", "<Tail>")

    @pytest.mark.unit
    def test_ids_use_lowercased_tokens(self, awh_graph, awh_vocab):
        lin = linearize(awh_graph, OrderLabel.identity(3), awh_vocab)
        assert lin.ids[1] == awh_vocab.id_of("awh")
        assert awh_vocab.unk_id not in lin.ids

    @pytest.mark.unit
    def test_segments_rebuild_triplets(self, awh_graph, awh_vocab):
        lin = linearize(awh_graph, OrderLabel.from_listing((2, 0, 1)), awh_vocab)
        segments = lin.segments()
        assert [slot for slot, _ in segments] == [2, 0, 1]
        assert [t for _, t in segments] == [awh_graph.triplets[i] for i in (2, 0, 1)]

    @pytest.mark.unit
    def test_invalid_order_is_rejected(self, awh_graph, awh_vocab):
        with pytest.raises(InvalidOrderError):
            linearize(awh_graph, OrderLabel((0, 1)), awh_vocab)
