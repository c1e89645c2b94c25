"""The Entity Hallucination Index and entity precision/recall/F1.

EHI folds five entity-level counts into one score in [0, 1]:

  EF  entities the summary correctly carries over from the source
  PH  entities absent from the source but confirmed by the reference
  NH  entities grounded in neither source nor reference
  OF  summary mentions of one entity beyond the repeat cap
  LF  repeatedly-mentioned source entities the summary omits

With g(x) = e^x - 1, EHI = (g(PH)+g(EF)) / (g(PH)+g(EF)+g(NH)+g(OF)+g(LF)).
When every error term is zero the score is exactly 1 whatever PH and EF are,
which is what makes it usable directly as a precision-weighted reward. The
all-zero corner (an entity-free summary of an entity-free document) is
defined as 1: nothing was hallucinated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .entities import EntitySet, Gazetteer, entity_sets_for_pair


class ReferenceMode(enum.Enum):
    WITH_REFERENCE = "with_reference"
    REFERENCE_FREE = "reference_free"


@dataclass(frozen=True)
class MetricConfig:
    """Knobs for the count-based component definitions.

    ``of_repeat_cap``: summary mentions of one entity beyond this count are
    overfocus. ``lf_importance_threshold``: a source entity counts as important
    (so its omission is lost focus) once its source mention count reaches this.
    """

    of_repeat_cap: int = 2
    lf_importance_threshold: int = 2
    reference_mode: ReferenceMode = ReferenceMode.WITH_REFERENCE
    heuristics_enabled: bool = True

    def __post_init__(self):
        if self.of_repeat_cap < 1:
            raise ValueError(f"of_repeat_cap must be >= 1, got {self.of_repeat_cap}")
        if self.lf_importance_threshold < 1:
            raise ValueError(
                f"lf_importance_threshold must be >= 1, got {self.lf_importance_threshold}"
            )


@dataclass(frozen=True)
class EhiComponents:
    ph: float
    ef: float
    nh: float
    of: float
    lf: float

    def __post_init__(self):
        for name in ("ph", "ef", "nh", "of", "lf"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"component {name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class EhiReport:
    """Full scoring result for one (source, summary[, reference]) triple."""

    ehi: float
    components: EhiComponents
    entity_precision: float
    entity_recall: float
    entity_f1: float
    grounded_keys: frozenset[str]
    hallucinated_keys: frozenset[str]
    omitted_important_keys: frozenset[str]
    reference_used: bool

    def to_dict(self) -> dict:
        """Flat JSON-ready form; also the wire format of the reward service."""
        return {
            "ehi": self.ehi,
            "ph": self.components.ph,
            "ef": self.components.ef,
            "nh": self.components.nh,
            "of": self.components.of,
            "lf": self.components.lf,
            "entity_precision": self.entity_precision,
            "entity_recall": self.entity_recall,
            "entity_f1": self.entity_f1,
            "grounded_keys": sorted(self.grounded_keys),
            "hallucinated_keys": sorted(self.hallucinated_keys),
            "omitted_important_keys": sorted(self.omitted_important_keys),
            "reference_used": self.reference_used,
        }


def compute_components(
    e_src: EntitySet,
    e_sum: EntitySet,
    e_ref: EntitySet | None,
    config: MetricConfig = MetricConfig(),
) -> EhiComponents:
    """Count the five components from extracted entity sets.

    All terms except OF are counts of distinct normalized keys; OF is
    mention-based by nature (it measures repetition). A missing reference
    simply means PH = 0 and nothing is reference-confirmed.
    """
    src_distinct = e_src.distinct
    sum_counts = e_sum.counts
    sum_distinct = set(sum_counts)
    ref_distinct = e_ref.distinct if e_ref is not None else set()

    added = sum_distinct - src_distinct
    ef = len(sum_distinct & src_distinct)
    ph = len(added & ref_distinct) if e_ref is not None else 0
    nh = len(added - ref_distinct)
    of = sum(max(0, c - config.of_repeat_cap) for c in sum_counts.values())
    lf = sum(
        1
        for k, c in e_src.counts.items()
        if c >= config.lf_importance_threshold and k not in sum_distinct
    )
    return EhiComponents(ph=float(ph), ef=float(ef), nh=float(nh), of=float(of), lf=float(lf))


def ehi_from_components(c: EhiComponents, plain_exponentials: bool = False) -> float:
    """Fold the five components into the scalar score.

    Default form uses g(x) = e^x - 1 per term, so zero error terms give
    exactly 1. ``plain_exponentials`` switches to raw e^x terms for
    compatibility with the additive-exponential reading (that form never
    reaches 1 and scores the all-zero corner as 0.4).
    """
    if plain_exponentials:
        good = math.exp(c.ph) + math.exp(c.ef)
        bad = math.exp(c.nh) + math.exp(c.of) + math.exp(c.lf)
        return good / (good + bad)
    good = math.expm1(c.ph) + math.expm1(c.ef)
    bad = math.expm1(c.nh) + math.expm1(c.of) + math.expm1(c.lf)
    if good == 0.0 and bad == 0.0:
        return 1.0
    return good / (good + bad)


def entity_f1(e_ref: EntitySet, e_gen: EntitySet) -> tuple[float, float, float]:
    """Precision/recall/F1 on distinct normalized keys.

    Edge conventions: both sets empty -> (1, 1, 1); exactly one empty ->
    (0, 0, 0); P + R = 0 -> F1 = 0.
    """
    ref = e_ref.distinct
    gen = e_gen.distinct
    if not ref and not gen:
        return (1.0, 1.0, 1.0)
    if not ref or not gen:
        return (0.0, 0.0, 0.0)
    overlap = len(ref & gen)
    precision = overlap / len(gen)
    recall = overlap / len(ref)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return (precision, recall, f1)


def report_from_sets(
    e_src: EntitySet,
    e_sum: EntitySet,
    e_ref: EntitySet | None,
    config: MetricConfig = MetricConfig(),
) -> EhiReport:
    """Score pre-extracted entity sets (the text-free path)."""
    use_ref = e_ref is not None and config.reference_mode is ReferenceMode.WITH_REFERENCE
    ref_set = e_ref if use_ref else None

    components = compute_components(e_src, e_sum, ref_set, config)
    ehi = ehi_from_components(components)

    sum_distinct = e_sum.distinct
    src_distinct = e_src.distinct
    ref_distinct = ref_set.distinct if ref_set is not None else set()
    grounded = sum_distinct & src_distinct
    hallucinated = sum_distinct - (src_distinct | ref_distinct)
    omitted = {
        k
        for k, c in e_src.counts.items()
        if c >= config.lf_importance_threshold and k not in sum_distinct
    }

    precision, recall, f1 = entity_f1(ref_set if ref_set is not None else e_src, e_sum)
    return EhiReport(
        ehi=ehi,
        components=components,
        entity_precision=precision,
        entity_recall=recall,
        entity_f1=f1,
        grounded_keys=frozenset(grounded),
        hallucinated_keys=frozenset(hallucinated),
        omitted_important_keys=frozenset(omitted),
        reference_used=ref_set is not None,
    )


def score_pair(
    source: str,
    summary: str,
    reference: str | None,
    gazetteer: Gazetteer,
    config: MetricConfig = MetricConfig(),
) -> EhiReport:
    """Extract entities from the texts and score the pair.

    With a reference (and WITH_REFERENCE mode), F1 is generated-vs-reference;
    otherwise precision/recall/F1 fall back to generated-vs-source and the
    report is flagged reference_used=False.
    """
    e_src, e_sum, e_ref = entity_sets_for_pair(
        source, summary, reference, gazetteer, config.heuristics_enabled
    )
    return report_from_sets(e_src, e_sum, e_ref, config)
