"""Independent reference implementations the tests check the library against.

Everything here is deliberately naive (linear scans, direct formula
evaluation) and never imports the code paths it verifies beyond plain data
types.
"""

from __future__ import annotations

import math
import random

from ehikit.entities import EntityType
from ehikit.text import normalize_entity


def ehi_direct(ph: float, ef: float, nh: float, of: float, lf: float) -> float:
    """Direct re-evaluation of the shifted-exponential score."""
    good = math.expm1(ph) + math.expm1(ef)
    bad = math.expm1(nh) + math.expm1(of) + math.expm1(lf)
    if good == 0.0 and bad == 0.0:
        return 1.0
    return good / (good + bad)


def brute_force_prf(ref_keys: set[str], gen_keys: set[str]) -> tuple[float, float, float]:
    """Precision/recall/F1 with the intersection counted by linear scan."""
    if not ref_keys and not gen_keys:
        return (1.0, 1.0, 1.0)
    if not ref_keys or not gen_keys:
        return (0.0, 0.0, 0.0)
    overlap = 0
    for k in ref_keys:
        for g in gen_keys:
            if k == g:
                overlap += 1
                break
    precision = overlap / len(gen_keys)
    recall = overlap / len(ref_keys)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return (precision, recall, f1)


def naive_greedy_match(token_texts: list[str], entries: dict[str, EntityType]) -> list[tuple[str, int, int]]:
    """Quadratic reference matcher: at each position try every entry, keep the longest.

    Returns (key, first, last) triples; mirrors the contract (punctuation-free
    candidates, case-insensitive normalized comparison, no overlaps) without
    sharing the library's scan structure.
    """
    punct = set(".,;:!?\"'()[]{}")

    def is_punct(tok: str) -> bool:
        return all(c in punct for c in tok)

    matches: list[tuple[str, int, int]] = []
    i = 0
    n = len(token_texts)
    while i < n:
        best_len = 0
        best_key = None
        if not is_punct(token_texts[i]):
            for key in entries:
                length = len(key.split())
                if length > n - i or length <= best_len:
                    continue
                window = token_texts[i : i + length]
                if any(is_punct(t) for t in window):
                    continue
                try:
                    candidate = normalize_entity(" ".join(window))
                except ValueError:
                    continue
                if candidate == key:
                    best_len = length
                    best_key = key
        if best_key is not None:
            matches.append((best_key, i, i + best_len - 1))
            i += best_len
        else:
            i += 1
    return matches


WORD_POOL = [
    "north", "river", "stone", "gamma", "delta", "union", "pixel", "quartz",
    "haven", "ridge", "sol", "vega", "orbit", "crest", "marsh", "flint",
]

FILLER_POOL = ["met", "spoke", "about", "during", "before", "again", "later", "twice"]


def random_gazetteer_entries(rng: random.Random) -> dict[str, EntityType]:
    """A random lexicon with deliberate shared-prefix pairs to stress greedy matching."""
    types = list(EntityType)
    entries: dict[str, EntityType] = {}
    words = rng.sample(WORD_POOL, k=rng.randint(4, 8))
    for w in words:
        entries[w] = rng.choice(types)
        if rng.random() < 0.5:
            other = rng.choice(WORD_POOL)
            entries[f"{w} {other}"] = rng.choice(types)
    return entries


def random_text_from(entries: dict[str, EntityType], rng: random.Random) -> str:
    """Text mixing gazetteer surfaces (random casing) with filler and punctuation."""
    parts: list[str] = []
    keys = list(entries)
    for _ in range(rng.randint(3, 14)):
        roll = rng.random()
        if roll < 0.5:
            surface = rng.choice(keys)
        else:
            surface = rng.choice(FILLER_POOL)
        styled = _restyle(surface, rng)
        if rng.random() < 0.2:
            styled += rng.choice([".", ",", "!", "?"])
        parts.append(styled)
    return " ".join(parts)


def _restyle(surface: str, rng: random.Random) -> str:
    roll = rng.random()
    if roll < 0.4:
        return surface
    if roll < 0.7:
        return surface.upper()
    return " ".join(w.capitalize() for w in surface.split())
