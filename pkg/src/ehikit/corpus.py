"""JSONL corpora: streaming read/write and reproducible train/val/test splits."""

from __future__ import annotations

import gzip
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

_KNOWN_FIELDS = ("id", "source", "summary", "reference", "scores")


class CorpusParse(ValueError):
    """Raised for a malformed corpus line; carries the 1-based line number."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"corpus line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class DuplicateId(ValueError):
    def __init__(self, record_id: str):
        super().__init__(f"duplicate record id {record_id!r}")
        self.record_id = record_id


class CorpusTooSmall(ValueError):
    pass


@dataclass
class ScoreRecord:
    """One corpus row. Unknown JSON fields ride along in ``extra`` for round-trips."""

    id: str
    source: str
    summary: str | None = None
    reference: str | None = None
    scores: dict | None = None
    extra: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        obj: dict = {"id": self.id, "source": self.source}
        if self.summary is not None:
            obj["summary"] = self.summary
        if self.reference is not None:
            obj["reference"] = self.reference
        if self.scores is not None:
            obj["scores"] = self.scores
        obj.update(self.extra)
        return obj


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float
    val_frac: float
    test_frac: float
    seed: int

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(f <= 0 for f in fracs):
            raise ValueError(f"fractions must be positive, got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1, got {sum(fracs)}")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def read_jsonl(stream: IO) -> list[ScoreRecord]:
    """Parse newline-delimited JSON records, preserving order and unknown fields."""
    records: list[ScoreRecord] = []
    seen_ids: set[str] = set()
    for line_no, raw in enumerate(stream, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorpusParse(line_no, f"invalid JSON: {e.msg}") from None
        if not isinstance(obj, dict):
            raise CorpusParse(line_no, "record is not a JSON object")
        rec_id = obj.get("id")
        if not isinstance(rec_id, str) or not rec_id:
            raise CorpusParse(line_no, "missing or empty 'id'")
        source = obj.get("source")
        if not isinstance(source, str) or not source:
            raise CorpusParse(line_no, "missing or empty 'source'")
        if rec_id in seen_ids:
            raise DuplicateId(rec_id)
        seen_ids.add(rec_id)
        extra = {k: v for k, v in obj.items() if k not in _KNOWN_FIELDS}
        records.append(
            ScoreRecord(
                id=rec_id,
                source=source,
                summary=obj.get("summary"),
                reference=obj.get("reference"),
                scores=obj.get("scores"),
                extra=extra,
            )
        )
    return records


def write_jsonl(records: Iterable[ScoreRecord], stream: IO) -> None:
    """Write one compact JSON object per line; absent optional fields are omitted."""
    for rec in records:
        stream.write(json.dumps(rec.to_json_obj(), ensure_ascii=False, sort_keys=False))
        stream.write("\n")


def read_jsonl_path(path: str | Path) -> list[ScoreRecord]:
    """Read a corpus file; names ending in .gz are transparently decompressed."""
    path = Path(path)
    opener = gzip.open if path.name.endswith(".gz") else open
    try:
        with opener(path, "rt", encoding="utf-8") as fh:
            return read_jsonl(fh)
    except OSError as e:
        raise OSError(f"reading {path}: {e}") from e


def write_jsonl_path(records: Iterable[ScoreRecord], path: str | Path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            write_jsonl(records, fh)
    except OSError as e:
        raise OSError(f"writing {path}: {e}") from e


class SplitMix64:
    """Tiny 64-bit PRNG: additive Weyl sequence plus a finalizer mix.

    Fixed here (rather than a stdlib generator) so split assignments are
    reproducible across platforms and language reimplementations.
    """

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def randrange(self, n: int) -> int:
        # Modulo bias is < n / 2**64: irrelevant at corpus scale, and keeping
        # the mapping single-draw keeps it trivially portable.
        return self.next_u64() % n


def split_corpus(
    records: list[ScoreRecord], spec: SplitSpec
) -> tuple[list[ScoreRecord], list[ScoreRecord], list[ScoreRecord]]:
    """Deterministically shuffle (SplitMix64 + Fisher-Yates) and cut train/val/test.

    Boundaries fall at floor(n*train_frac) and floor(n*(train_frac+val_frac));
    the remainder lands in test.
    """
    n = len(records)
    if n < 3:
        raise CorpusTooSmall(f"need at least 3 records to split, got {n}")
    order = list(range(n))
    rng = SplitMix64(spec.seed)
    for i in range(n - 1, 0, -1):
        j = rng.randrange(i + 1)
        order[i], order[j] = order[j], order[i]
    shuffled = [records[i] for i in order]
    train_end = int(n * spec.train_frac)
    val_end = int(n * (spec.train_frac + spec.val_frac))
    return shuffled[:train_end], shuffled[train_end:val_end], shuffled[val_end:]
