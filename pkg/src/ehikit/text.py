"""Deterministic tokenization, entity-key normalization, and overlapping chunking.

Everything here is a pure function of its inputs: no models, no caches, no
global state, so results are byte-reproducible across runs and safe to call
from any number of threads.
"""

from __future__ import annotations

from dataclasses import dataclass

# Punctuation characters split off a word's edges; interior occurrences
# (hyphens, contraction apostrophes, "U.S") stay attached.
EDGE_PUNCTUATION = frozenset(".,;:!?\"'()[]{}")

DEFAULT_MAX_CHUNK_TOKENS = 950
DEFAULT_OVERLAP_TOKENS = 200


class NormalizesToEmpty(ValueError):
    """Raised when an entity surface form normalizes to the empty string."""


class InvalidChunkConfig(ValueError):
    """Raised when max_chunk_tokens <= overlap_tokens."""


@dataclass(frozen=True)
class Token:
    """One token with exact byte offsets into the UTF-8 encoding of the source."""

    text: str
    start: int
    end: int


@dataclass(frozen=True)
class Chunk:
    """A window of consecutive document tokens.

    ``first``/``last`` are inclusive indices into the document token list;
    ``text`` is the window's token texts joined with single spaces.
    """

    index: int
    first: int
    last: int
    text: str


def tokenize(text: str) -> list[Token]:
    """Split ``text`` on whitespace, peeling edge punctuation into its own tokens.

    Offsets are byte offsets into ``text.encode("utf-8")``, so for every token
    ``text.encode()[tok.start:tok.end].decode() == tok.text``.
    """
    tokens: list[Token] = []
    byte_pos = 0
    char_pos = 0
    n = len(text)
    while char_pos < n:
        ch = text[char_pos]
        if ch.isspace():
            byte_pos += len(ch.encode("utf-8"))
            char_pos += 1
            continue
        word_start = char_pos
        word_byte_start = byte_pos
        while char_pos < n and not text[char_pos].isspace():
            byte_pos += len(text[char_pos].encode("utf-8"))
            char_pos += 1
        word = text[word_start:char_pos]
        tokens.extend(_split_word(word, word_byte_start))
    return tokens


def _split_word(word: str, byte_start: int) -> list[Token]:
    """Emit edge punctuation of one whitespace-delimited word as separate tokens."""
    lead = 0
    while lead < len(word) and word[lead] in EDGE_PUNCTUATION:
        lead += 1
    trail = len(word)
    while trail > lead and word[trail - 1] in EDGE_PUNCTUATION:
        trail -= 1

    out: list[Token] = []
    pos = byte_start
    for ch in word[:lead]:
        width = len(ch.encode("utf-8"))
        out.append(Token(ch, pos, pos + width))
        pos += width
    core = word[lead:trail]
    if core:
        width = len(core.encode("utf-8"))
        out.append(Token(core, pos, pos + width))
        pos += width
    for ch in word[trail:]:
        width = len(ch.encode("utf-8"))
        out.append(Token(ch, pos, pos + width))
        pos += width
    return out


def normalize_entity(surface: str, strip_suffixes: bool = True) -> str:
    """Return the case-insensitive matching key for an entity surface form.

    Lowercases, collapses interior whitespace, and strips edges; with
    ``strip_suffixes`` (the default) trailing possessive ``'s`` and trailing
    periods are also removed, so "Acme Corp." matches "Acme Corp". The result
    is a fixpoint: normalizing twice changes nothing.
    """
    key = " ".join(surface.lower().split())
    if strip_suffixes:
        while True:
            trimmed = key.rstrip(".").rstrip()
            if trimmed.endswith("'s"):
                trimmed = trimmed[:-2].rstrip()
            if trimmed == key:
                break
            key = trimmed
    if not key:
        raise NormalizesToEmpty(f"surface {surface!r} normalizes to empty string")
    return key


def chunk_document(
    tokens: list[Token],
    max_chunk_tokens: int = DEFAULT_MAX_CHUNK_TOKENS,
    overlap_tokens: int = DEFAULT_OVERLAP_TOKENS,
) -> list[Chunk]:
    """Cover the token list with fixed-stride overlapping windows.

    Window k starts at ``k * (max_chunk_tokens - overlap_tokens)`` and holds up
    to ``max_chunk_tokens`` tokens; windows are emitted until the document end
    is reached, so consecutive windows share exactly ``overlap_tokens`` tokens
    (the final window is simply shorter, never redundant).
    """
    if max_chunk_tokens <= overlap_tokens or overlap_tokens < 0:
        raise InvalidChunkConfig(
            f"need max_chunk_tokens > overlap_tokens >= 0, "
            f"got max={max_chunk_tokens} overlap={overlap_tokens}"
        )
    n = len(tokens)
    step = max_chunk_tokens - overlap_tokens
    chunks: list[Chunk] = []
    start = 0
    while start < n:
        end = min(start + max_chunk_tokens, n)
        text = " ".join(t.text for t in tokens[start:end])
        chunks.append(Chunk(index=len(chunks), first=start, last=end - 1, text=text))
        if end >= n:
            break
        start += step
    return chunks
