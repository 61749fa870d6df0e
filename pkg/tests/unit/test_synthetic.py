"""
Unit tests for the synthetic corpus generators.
"""

import pytest

from graphscribe.data.types import PAD_CLASS
from graphscribe.experiments.synthetic import (
    RELATIONS,
    _phrase_words,
    entity_pool,
    feature_ordered_graphs,
    realise,
    split_corpus,
    synthetic_corpus,
)
from graphscribe.supervision.sidecar import build_supervision


class TestEntityPool:

    @pytest.mark.unit
    def test_names_are_distinct_and_disjoint(self):
        names = entity_pool(80, seed=5)
        assert len(set(names)) == 80
        words = [w.lower() for name in names for w in name.split()]
        assert len(words) == len(set(words))
        assert not set(words) & _phrase_words()

    @pytest.mark.unit
    def test_deterministic(self):
        assert entity_pool(10, seed=2) == entity_pool(10, seed=2)
        assert entity_pool(10, seed=2) != entity_pool(10, seed=3)


class TestRealise:

    @pytest.mark.unit
    def test_one_clause(self):
        assert realise("Kalo", [("{h} is led by {t}", "Mive")]) == "Kalo is led by Mive."

    @pytest.mark.unit
    def test_two_clauses(self):
        text = realise("Kalo", [("{h} is led by {t}", "Mive"), ("{h} speaks {t}", "Rusa")])
        assert text == "Kalo is led by Mive and Kalo speaks Rusa."

    @pytest.mark.unit
    def test_three_clauses(self):
        clauses = [("{h} is led by {t}", "A"), ("{h} speaks {t}", "B"), ("{h} pays with {t}", "C")]
        assert realise("K", clauses) == "K is led by A, K speaks B, and K pays with C."


class TestSyntheticCorpus:

    @pytest.mark.unit
    def test_ids_and_sizes(self):
        examples = synthetic_corpus(12, seed=4, max_triplets=3, entity_pool_size=50)
        assert [e.id for e in examples] == [f"synth-4-{i}" for i in range(12)]
        assert all(1 <= len(e.graph) <= 3 for e in examples)

    @pytest.mark.unit
    def test_deterministic(self):
        first = synthetic_corpus(5, seed=1, entity_pool_size=40)
        second = synthetic_corpus(5, seed=1, entity_pool_size=40)
        assert [e.reference for e in first] == [e.reference for e in second]

    @pytest.mark.unit
    @pytest.mark.parametrize("kwargs", [
        {"max_triplets": 0},
        {"max_triplets": len(RELATIONS) + 1},
        {"max_triplets": 3, "entity_pool_size": 3},
    ])
    def test_invalid_arguments(self, kwargs):
        with pytest.raises(ValueError):
            synthetic_corpus(2, **kwargs)

    @pytest.mark.unit
    def test_supervision_is_complete(self, synthetic_examples):
        for example in synthetic_examples:
            record = build_supervision(example, 4)
            n = len(example.graph)
            assert sorted(r for r in record.order if r != PAD_CLASS) == list(range(n))

            entity_words = {
                w for t in example.graph.triplets for entity in (t.head, t.tail) for w in entity.lower().split()
            }
            expected = [int(token in entity_words) for token in record.tokens]
            assert record.copy_labels == expected


class TestFeatureOrdered:

    @pytest.mark.unit
    def test_described_in_relation_order(self):
        surfaces = [surface for surface, _ in RELATIONS]
        for example in feature_ordered_graphs(10, seed=2, max_triplets=4):
            assert example.id.startswith("ordered-2-")
            assert len(example.graph) >= 2
            by_position = sorted(example.graph.triplets, key=lambda t: example.reference.find(t.tail))
            relation_ids = [surfaces.index(t.relation) for t in by_position]
            assert relation_ids == sorted(relation_ids)


class TestSplit:

    @pytest.mark.unit
    def test_default_fractions(self):
        examples = synthetic_corpus(10, seed=0, entity_pool_size=40)
        splits = split_corpus(examples)
        assert [len(splits[k]) for k in ("train", "validation", "test")] == [8, 1, 1]
        assert splits["train"][0].id == examples[0].id
        assert splits["test"][0].id == examples[9].id
