"""Deterministic named-entity extraction: gazetteer lookup plus a capitalization heuristic.

The extractor is a drop-in stand-in for a statistical NER model: given the
same text, gazetteer, and flags it always produces the same entity set, which
is what makes the metric and the training loop testable end to end. External
NER output can bypass this module entirely (the reward service accepts
pre-extracted entity lists).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable

from .text import EDGE_PUNCTUATION, NormalizesToEmpty, Token, normalize_entity, tokenize


class GazetteerParse(ValueError):
    """Raised for a malformed gazetteer line; carries the 1-based line number."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"gazetteer line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class EntityType(enum.Enum):
    PERSON = "PERSON"
    ORG = "ORG"
    LOC = "LOC"
    EVENT = "EVENT"
    MISC = "MISC"


@dataclass(frozen=True)
class EntityMention:
    """One extracted mention: raw surface, normalized key, type, token span (inclusive)."""

    surface: str
    key: str
    etype: EntityType
    token_span: tuple[int, int]


@dataclass
class EntitySet:
    """All mentions extracted from one text, with per-key mention counts."""

    mentions: list[EntityMention] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for m in self.mentions:
            out[m.key] = out.get(m.key, 0) + 1
        return out

    @property
    def distinct(self) -> set[str]:
        return {m.key for m in self.mentions}

    @classmethod
    def from_surfaces(cls, surfaces: Iterable[str]) -> "EntitySet":
        """Build a set from raw surface strings (one mention per list element)."""
        mentions = [
            EntityMention(surface=s, key=normalize_entity(s), etype=EntityType.MISC, token_span=(i, i))
            for i, s in enumerate(surfaces)
        ]
        return cls(mentions=mentions)

    @classmethod
    def from_normalized_keys(cls, keys: Iterable[str]) -> "EntitySet":
        """Build a set from already-normalized keys, skipping re-normalization."""
        mentions = [
            EntityMention(surface=k, key=k, etype=EntityType.MISC, token_span=(i, i))
            for i, k in enumerate(keys)
        ]
        return cls(mentions=mentions)


class KeyCounts:
    """Bare key->count view exposing the same counts/distinct surface as EntitySet.

    The metric functions only read those two attributes, so hot loops (the
    trainer scores every sampled summary) can skip building mention objects.
    """

    __slots__ = ("_counts", "_distinct")

    def __init__(self, counts: dict[str, int]):
        self._counts = counts
        self._distinct: set[str] | None = None

    @property
    def counts(self) -> dict[str, int]:
        return self._counts

    @property
    def distinct(self) -> set[str]:
        if self._distinct is None:
            self._distinct = set(self._counts)
        return self._distinct


@dataclass(frozen=True)
class Gazetteer:
    """Immutable lexicon mapping normalized entity keys to types."""

    entries: dict[str, EntityType]
    max_entry_tokens: int

    @classmethod
    def from_entries(cls, entries: dict[str, EntityType]) -> "Gazetteer":
        max_len = max((len(k.split()) for k in entries), default=0)
        return cls(entries=dict(entries), max_entry_tokens=max_len)


def load_gazetteer(source: BinaryIO) -> Gazetteer:
    """Parse a UTF-8 "surface<TAB>TYPE" stream; '#' comments and blank lines skipped.

    Duplicate keys: last line wins. Any malformed line (field count, unknown
    type, surface that normalizes to nothing) raises GazetteerParse with its
    line number.
    """
    entries: dict[str, EntityType] = {}
    for line_no, raw in enumerate(source, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise GazetteerParse(line_no, f"expected 2 tab-separated fields, got {len(parts)}")
        surface, type_name = parts
        try:
            etype = EntityType(type_name.strip())
        except ValueError:
            raise GazetteerParse(line_no, f"unknown entity type {type_name.strip()!r}") from None
        try:
            key = normalize_entity(surface)
        except NormalizesToEmpty:
            raise GazetteerParse(line_no, f"surface {surface!r} normalizes to empty") from None
        entries[key] = etype
    return Gazetteer.from_entries(entries)


# Capitalized forms of these words never start a heuristic entity at sentence
# start; fixed 50-word list.
SENTENCE_INITIAL_STOPWORDS = frozenset(
    """
    the a an it he she they we i you this that these those there here when
    where what who whom whose why how but and or so yet for nor on in at by
    to from with as if then than not no all some any each every both
    """.split()
)

_SENTENCE_ENDERS = frozenset(".!?")


def _is_punctuation_token(tok: Token) -> bool:
    return all(c in EDGE_PUNCTUATION for c in tok.text)


def extract_entities(text: str, gazetteer: Gazetteer, heuristics_enabled: bool = True) -> EntitySet:
    """Extract entity mentions from ``text``.

    Pass 1 is a greedy longest-match scan of normalized token n-grams against
    the gazetteer (case-insensitive, left to right, no overlaps; candidates
    never include punctuation-only tokens). Pass 2, when enabled, emits each
    maximal run of capitalized tokens outside gazetteer matches as a MISC
    mention, except a lone sentence-initial stopword like "The".
    """
    tokens = tokenize(text)
    n = len(tokens)
    mentions: list[EntityMention] = []
    claimed = [False] * n

    i = 0
    while i < n:
        if _is_punctuation_token(tokens[i]):
            i += 1
            continue
        matched = False
        for length in range(min(gazetteer.max_entry_tokens, n - i), 0, -1):
            window = tokens[i : i + length]
            if any(_is_punctuation_token(t) for t in window):
                continue
            try:
                key = normalize_entity(" ".join(t.text for t in window))
            except NormalizesToEmpty:
                continue
            etype = gazetteer.entries.get(key)
            if etype is not None:
                surface = " ".join(t.text for t in window)
                mentions.append(EntityMention(surface, key, etype, (i, i + length - 1)))
                for j in range(i, i + length):
                    claimed[j] = True
                i += length
                matched = True
                break
        if not matched:
            i += 1

    if heuristics_enabled:
        mentions.extend(_capitalized_runs(tokens, claimed))
        mentions.sort(key=lambda m: m.token_span)
    return EntitySet(mentions=mentions)


def _capitalized_runs(tokens: list[Token], claimed: list[bool]) -> list[EntityMention]:
    """Maximal runs of capitalized, unclaimed tokens, emitted as MISC mentions."""
    out: list[EntityMention] = []
    n = len(tokens)
    i = 0
    while i < n:
        if claimed[i] or not _starts_capitalized(tokens[i]) or _is_excluded_stopword(tokens, i):
            i += 1
            continue
        j = i
        while (
            j + 1 < n
            and not claimed[j + 1]
            and _starts_capitalized(tokens[j + 1])
            and not _is_excluded_stopword(tokens, j + 1)
        ):
            j += 1
        surface = " ".join(t.text for t in tokens[i : j + 1])
        try:
            key = normalize_entity(surface)
        except NormalizesToEmpty:
            i = j + 1
            continue
        out.append(EntityMention(surface, key, EntityType.MISC, (i, j)))
        i = j + 1
    return out


def _starts_capitalized(tok: Token) -> bool:
    return bool(tok.text) and tok.text[0].isupper()


def _is_excluded_stopword(tokens: list[Token], i: int) -> bool:
    """True for a capitalized stopword in sentence-initial position."""
    if tokens[i].text.lower() not in SENTENCE_INITIAL_STOPWORDS:
        return False
    return i == 0 or tokens[i - 1].text in _SENTENCE_ENDERS


def entity_sets_for_pair(
    source: str,
    summary: str,
    reference: str | None,
    gazetteer: Gazetteer,
    heuristics_enabled: bool = True,
) -> tuple[EntitySet, EntitySet, EntitySet | None]:
    """Extract source, summary, and (optionally) reference entity sets with one config."""
    e_src = extract_entities(source, gazetteer, heuristics_enabled)
    e_sum = extract_entities(summary, gazetteer, heuristics_enabled)
    e_ref = extract_entities(reference, gazetteer, heuristics_enabled) if reference is not None else None
    return e_src, e_sum, e_ref


def default_gazetteer() -> Gazetteer:
    """The gazetteer shipped with the package (tests, demos, the synthetic task)."""
    from importlib.resources import files

    data = files("ehikit.data").joinpath("default_gazetteer.tsv").read_bytes()
    import io

    return load_gazetteer(io.BytesIO(data))
