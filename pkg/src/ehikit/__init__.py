"""ehikit: entity-faithfulness scoring for abstractive summaries.

Library surface: tokenization/chunking (text), deterministic entity
extraction (entities), the EHI metric and entity F1 (metric), JSONL corpora
and splits (corpus), the toy REINFORCE trainer (training), and the
newline-JSON reward service (service). The ``ehi`` CLI wraps all of it.
"""

__version__ = "0.1.0"

from .entities import (
    EntityMention,
    EntitySet,
    EntityType,
    Gazetteer,
    default_gazetteer,
    extract_entities,
    load_gazetteer,
)
from .metric import (
    EhiComponents,
    EhiReport,
    MetricConfig,
    ReferenceMode,
    compute_components,
    ehi_from_components,
    entity_f1,
    score_pair,
)
from .text import Chunk, Token, chunk_document, normalize_entity, tokenize

__all__ = [
    "__version__",
    "Chunk",
    "EhiComponents",
    "EhiReport",
    "EntityMention",
    "EntitySet",
    "EntityType",
    "Gazetteer",
    "MetricConfig",
    "ReferenceMode",
    "Token",
    "chunk_document",
    "compute_components",
    "default_gazetteer",
    "ehi_from_components",
    "entity_f1",
    "extract_entities",
    "load_gazetteer",
    "normalize_entity",
    "score_pair",
    "tokenize",
]
