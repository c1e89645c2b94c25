import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ehikit.text import (
    Chunk,
    InvalidChunkConfig,
    NormalizesToEmpty,
    chunk_document,
    normalize_entity,
    tokenize,
)


def texts(tok):
    return [t.text for t in tok]


class TestTokenize:
    def test_empty(self):
        assert tokenize("") == []

    def test_trailing_period_split(self):
        assert texts(tokenize("Alice met Bob.")) == ["Alice", "met", "Bob", "."]

    def test_mixed_punctuation(self):
        assert texts(tokenize("Acme Corp. (NYC)")) == ["Acme", "Corp", ".", "(", "NYC", ")"]

    def test_interior_punctuation_stays(self):
        assert texts(tokenize("state-of-the-art don't")) == ["state-of-the-art", "don't"]

    def test_possessive_stays_one_token(self):
        assert texts(tokenize("Alice's car")) == ["Alice's", "car"]

    def test_pure_punctuation_word(self):
        assert texts(tokenize("...")) == [".", ".", "."]

    def test_byte_offsets_ascii(self):
        text = "Alice met Bob."
        data = text.encode("utf-8")
        for tok in tokenize(text):
            assert data[tok.start : tok.end].decode("utf-8") == tok.text

    def test_byte_offsets_multibyte(self):
        text = "café   naïve… (Zoë)"
        data = text.encode("utf-8")
        toks = tokenize(text)
        assert toks
        for tok in toks:
            assert data[tok.start : tok.end].decode("utf-8") == tok.text

    @given(st.text(max_size=200))
    def test_tokens_sorted_and_disjoint(self, text):
        toks = tokenize(text)
        data = text.encode("utf-8")
        prev_end = -1
        for tok in toks:
            assert tok.start < tok.end
            assert tok.start >= prev_end
            assert data[tok.start : tok.end].decode("utf-8") == tok.text
            prev_end = tok.end

    @given(st.text(max_size=200))
    def test_round_trip(self, text):
        first = texts(tokenize(text))
        again = texts(tokenize(" ".join(first)))
        assert again == first


class TestNormalizeEntity:
    @pytest.mark.parametrize(
        "surface,key",
        [
            ("Acme Corp.", "acme corp"),
            ("  ALICE'S ", "alice"),
            ("Oracle", "oracle"),
            ("New   York", "new york"),
            ("Corp.'s", "corp"),
        ],
    )
    def test_examples(self, surface, key):
        assert normalize_entity(surface) == key

    def test_empty_after_normalization(self):
        with pytest.raises(NormalizesToEmpty):
            normalize_entity("...")
        with pytest.raises(NormalizesToEmpty):
            normalize_entity("'s")

    def test_suffix_stripping_can_be_disabled(self):
        assert normalize_entity("Acme Corp.", strip_suffixes=False) == "acme corp."
        assert normalize_entity("ALICE'S", strip_suffixes=False) == "alice's"

    @given(st.text(min_size=1, max_size=40))
    def test_idempotent(self, surface):
        try:
            once = normalize_entity(surface)
        except NormalizesToEmpty:
            return
        assert normalize_entity(once) == once


def _dummy_tokens(n):
    return tokenize(" ".join(f"w{i}" for i in range(n)))


class TestChunkDocument:
    def test_worked_example_2000(self):
        chunks = chunk_document(_dummy_tokens(2000), 950, 200)
        assert [(c.first, c.last) for c in chunks] == [(0, 949), (750, 1699), (1500, 1999)]
        assert [c.index for c in chunks] == [0, 1, 2]

    def test_fits_one_chunk(self):
        chunks = chunk_document(_dummy_tokens(500), 950, 200)
        assert [(c.first, c.last) for c in chunks] == [(0, 499)]

    def test_exact_fit_no_redundant_chunk(self):
        chunks = chunk_document(_dummy_tokens(950), 950, 200)
        assert [(c.first, c.last) for c in chunks] == [(0, 949)]

    def test_invalid_config(self):
        toks = _dummy_tokens(10)
        with pytest.raises(InvalidChunkConfig):
            chunk_document(toks, 200, 200)
        with pytest.raises(InvalidChunkConfig):
            chunk_document(toks, 100, 200)
        with pytest.raises(InvalidChunkConfig):
            chunk_document(toks, 100, -1)

    def test_chunk_text_joins_tokens(self):
        toks = tokenize("a b c d e")
        chunks = chunk_document(toks, 3, 1)
        assert chunks[0].text == "a b c"
        assert chunks[1].text == "c d e"

    @given(
        n=st.integers(min_value=1, max_value=5000),
        max_tokens=st.integers(min_value=2, max_value=1000),
        overlap=st.integers(min_value=0, max_value=999),
    )
    @settings(max_examples=200, deadline=None)  # step=1 configs are legitimately slow
    def test_properties(self, n, max_tokens, overlap):
        if overlap >= max_tokens:
            overlap = max_tokens - 1
        toks = _dummy_tokens(n)
        chunks = chunk_document(toks, max_tokens, overlap)

        covered = set()
        for c in chunks:
            assert c.last - c.first + 1 <= max_tokens
            covered.update(range(c.first, c.last + 1))
        assert covered == set(range(n))

        for a, b in zip(chunks, chunks[1:]):
            shared = a.last - b.first + 1
            assert shared == overlap

        assert chunk_document(toks, max_tokens, overlap) == chunks
