import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ehikit.entities import (
    EntitySet,
    EntityType,
    Gazetteer,
    GazetteerParse,
    SENTENCE_INITIAL_STOPWORDS,
    default_gazetteer,
    entity_sets_for_pair,
    extract_entities,
    load_gazetteer,
)
from ehikit.text import tokenize

from oracles import naive_greedy_match, random_gazetteer_entries, random_text_from


def gaz(*pairs):
    return Gazetteer.from_entries({k: t for k, t in pairs})


class TestLoadGazetteer:
    def test_basic(self):
        g = load_gazetteer(io.BytesIO(b"Alice\tPERSON\nAcme Corp\tORG"))
        assert g.entries == {"alice": EntityType.PERSON, "acme corp": EntityType.ORG}
        assert g.max_entry_tokens == 2

    def test_empty(self):
        g = load_gazetteer(io.BytesIO(b""))
        assert g.entries == {}
        assert g.max_entry_tokens == 0

    def test_unknown_type(self):
        with pytest.raises(GazetteerParse) as exc:
            load_gazetteer(io.BytesIO(b"Bob\tROBOT"))
        assert exc.value.line_no == 1

    def test_wrong_field_count(self):
        with pytest.raises(GazetteerParse) as exc:
            load_gazetteer(io.BytesIO(b"Alice\tPERSON\nBob PERSON\n"))
        assert exc.value.line_no == 2

    def test_comments_and_blanks_skipped(self):
        g = load_gazetteer(io.BytesIO(b"# header\n\nAlice\tPERSON\n   \n# trailing\n"))
        assert set(g.entries) == {"alice"}

    def test_duplicate_key_last_wins(self):
        g = load_gazetteer(io.BytesIO(b"Alice\tPERSON\nALICE\tORG\n"))
        assert g.entries == {"alice": EntityType.ORG}

    def test_surface_normalizing_to_empty(self):
        with pytest.raises(GazetteerParse) as exc:
            load_gazetteer(io.BytesIO(b"...\tPERSON"))
        assert exc.value.line_no == 1

    def test_keys_are_normalized(self):
        g = load_gazetteer(io.BytesIO("Acme  Corp.\tORG\n".encode()))
        assert set(g.entries) == {"acme corp"}

    def test_default_gazetteer_loads(self):
        g = default_gazetteer()
        assert g.entries["alice"] is EntityType.PERSON
        assert g.entries["acme corp"] is EntityType.ORG
        assert g.max_entry_tokens == 2


class TestExtractEntities:
    def test_case_insensitive_match(self):
        g = gaz(("alice", EntityType.PERSON), ("acme corp", EntityType.ORG))
        es = extract_entities("alice met ACME CORP twice", g)
        assert [(m.key, m.etype) for m in es.mentions] == [
            ("alice", EntityType.PERSON),
            ("acme corp", EntityType.ORG),
        ]
        assert es.counts == {"alice": 1, "acme corp": 1}

    def test_empty_text(self):
        es = extract_entities("", gaz(("alice", EntityType.PERSON)))
        assert es.mentions == []
        assert es.counts == {}
        assert es.distinct == set()

    def test_repeat_counting(self):
        es = extract_entities("Alice met Alice", gaz(("alice", EntityType.PERSON)))
        assert es.counts == {"alice": 2}
        assert len(es.mentions) == 2

    def test_greedy_longest_match(self):
        g = gaz(("acme", EntityType.ORG), ("acme corp", EntityType.ORG))
        es = extract_entities("They visited Acme Corp today", g, heuristics_enabled=False)
        assert [m.key for m in es.mentions] == ["acme corp"]

    def test_match_spans_are_token_indices(self):
        g = gaz(("acme corp", EntityType.ORG))
        es = extract_entities("Acme Corp. announced", g, heuristics_enabled=False)
        assert es.mentions[0].token_span == (0, 1)
        assert es.mentions[0].surface == "Acme Corp"

    def test_punctuation_blocks_ngram(self):
        g = gaz(("acme corp", EntityType.ORG))
        es = extract_entities("Acme. Corp", g, heuristics_enabled=False)
        assert es.mentions == []

    def test_heuristic_capitalized_run(self):
        es = extract_entities("Carol visited Zenith Labs", gaz(), heuristics_enabled=True)
        assert es.counts == {"carol": 1, "zenith labs": 1}
        assert all(m.etype is EntityType.MISC for m in es.mentions)

    def test_heuristic_skips_sentence_initial_stopword(self):
        es = extract_entities("The results are in. The Verdict arrived", gaz())
        assert es.counts == {"verdict": 1}

    def test_heuristic_keeps_midsentence_stopword_in_run(self):
        es = extract_entities("He visited The Hague", gaz())
        assert es.counts == {"the hague": 1}

    def test_heuristic_run_broken_by_punctuation(self):
        es = extract_entities("Carol. Dana", gaz())
        assert es.counts == {"carol": 1, "dana": 1}

    def test_heuristic_excluded_inside_gazetteer_match(self):
        g = gaz(("zenith labs", EntityType.ORG))
        es = extract_entities("Zenith Labs shipped", g, heuristics_enabled=True)
        assert [(m.key, m.etype) for m in es.mentions] == [("zenith labs", EntityType.ORG)]

    def test_heuristics_flag_off(self):
        es = extract_entities("Carol visited Zenith Labs", gaz(), heuristics_enabled=False)
        assert es.mentions == []

    def test_stopword_list_has_fifty_words(self):
        assert len(SENTENCE_INITIAL_STOPWORDS) == 50


class TestEntitySetsForPair:
    def test_basic_pair(self):
        g = gaz(("alice", EntityType.PERSON), ("bob", EntityType.PERSON))
        e_src, e_sum, e_ref = entity_sets_for_pair("Alice met Bob", "Alice spoke", None, g)
        assert e_src.distinct == {"alice", "bob"}
        assert e_sum.distinct == {"alice"}
        assert e_ref is None

    def test_all_empty(self):
        g = gaz(("alice", EntityType.PERSON))
        e_src, e_sum, e_ref = entity_sets_for_pair("", "", "", g)
        assert e_src.distinct == e_sum.distinct == e_ref.distinct == set()

    def test_heuristic_entity_in_summary(self):
        g = gaz(("alice", EntityType.PERSON))
        _, e_sum, _ = entity_sets_for_pair("alice met bob", "Carol spoke", None, g, True)
        assert "carol" in e_sum.distinct


class TestEntitySetHelpers:
    def test_from_surfaces_normalizes(self):
        es = EntitySet.from_surfaces(["IBM", "Acme Corp.", "ibm"])
        assert es.counts == {"ibm": 2, "acme corp": 1}

    def test_counts_sum_to_mentions(self):
        es = EntitySet.from_surfaces(["a", "b", "a", "c"])
        assert sum(es.counts.values()) == len(es.mentions)
        assert es.distinct == set(es.counts)


class TestRandomizedAgainstOracle:
    @settings(max_examples=150, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_matches_naive_matcher(self, seed):
        rng = random.Random(seed)
        entries = random_gazetteer_entries(rng)
        text = random_text_from(entries, rng)
        g = Gazetteer.from_entries(entries)

        es = extract_entities(text, g, heuristics_enabled=False)
        expected = naive_greedy_match([t.text for t in tokenize(text)], entries)
        assert [(m.key, *m.token_span) for m in es.mentions] == expected

    @settings(max_examples=150, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_case_insensitive_and_disjoint(self, seed):
        rng = random.Random(seed)
        entries = random_gazetteer_entries(rng)
        text = random_text_from(entries, rng)
        g = Gazetteer.from_entries(entries)

        es = extract_entities(text, g, heuristics_enabled=False)
        upper = extract_entities(text.upper(), g, heuristics_enabled=False)
        lower = extract_entities(text.lower(), g, heuristics_enabled=False)
        assert es.counts == upper.counts == lower.counts

        assert extract_entities(text, g, heuristics_enabled=False).mentions == es.mentions

        last_end = -1
        for m in sorted(es.mentions, key=lambda m: m.token_span):
            assert m.token_span[0] > last_end
            last_end = m.token_span[1]
