"""Reward-driven fine-tuning at desk scale.

A linear-softmax categorical policy generates fixed-length summaries for a
synthetic entity-summarization task; REINFORCE pushes it toward higher EHI:

  objective   J(theta) = E_{y ~ p_theta(y|x)} [ EHI(y, x) ]
  estimator   grad J ~= (1/B) sum_i r_i * grad log p_theta(y_i | x_i)

with rewards normalized per batch (an implicit baseline) and Adam applied to
the negated estimate. Sampling drives the gradients; greedy decoding is used
for the periodic validation snapshots that pick the best checkpoint.

The loop is sequential and fully determined by its seeds.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .entities import KeyCounts
from .metric import (
    MetricConfig,
    ReferenceMode,
    compute_components,
    ehi_from_components,
    entity_f1,
)

# Learning rate used for LM-scale runs of the same loop (the secondary adapter
# defaults to this); the toy policy needs the much larger default below.
LM_SCALE_LEARNING_RATE = 5e-6

DEFAULT_ENTITY_VOCAB = (
    "alice", "bob", "carol", "dave", "erin",
    "frank", "grace", "heidi", "ivan", "judy",
    "oracle", "microsoft", "acme", "globex", "initech",
    "umbrella", "cyberdyne", "wayne", "stark", "wonka",
)

DEFAULT_FILLER_VOCAB = (
    "the", "a", "on", "at", "met",
    "with", "spoke", "discussed", "meeting", "agenda",
    "project", "deadline", "report", "budget", "team",
    "plan", "review", "update", "notes", "action",
    "items", "next", "week", "agreed", "raised",
    "concerns", "timeline", "launch", "contract", "deal",
)

CHECKPOINT_FORMAT = "ehikit-policy"
CHECKPOINT_VERSION = 1


class NumericalDivergence(RuntimeError):
    """Non-finite value hit during training; carries a state dump for debugging."""

    def __init__(self, message: str, state: dict):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class SyntheticTask:
    """Entity-summarization toy task: sources mix known entities with filler words."""

    entity_keys: tuple[str, ...] = DEFAULT_ENTITY_VOCAB
    filler_vocab: tuple[str, ...] = DEFAULT_FILLER_VOCAB
    source_length: int = 20
    summary_length: int = 6
    entities_per_source: int = 3
    seed: int = 0

    def __post_init__(self):
        overlap = set(self.entity_keys) & set(self.filler_vocab)
        if overlap:
            raise ValueError(f"entity and filler vocabularies overlap: {sorted(overlap)}")
        if self.summary_length < self.entities_per_source:
            raise ValueError("summary_length must be >= entities_per_source")
        if self.source_length < 3 * self.entities_per_source:
            raise ValueError("source_length too small for up to 3 mentions per entity")

    @property
    def vocab(self) -> tuple[str, ...]:
        """Generation vocabulary: entity tokens first, then fillers."""
        return self.entity_keys + self.filler_vocab

    @property
    def n_entities(self) -> int:
        return len(self.entity_keys)

    @property
    def vocab_size(self) -> int:
        return len(self.entity_keys) + len(self.filler_vocab)


@dataclass(frozen=True)
class TaskInstance:
    source_text: str
    source_tokens: tuple[str, ...]
    reference_entities: tuple[str, ...]
    entity_counts: dict[str, int]
    bag: np.ndarray  # 0/1 presence over task.entity_keys


@dataclass
class PolicyState:
    """Parameters and Adam accumulators of the toy generation policy.

    theta has shape [n_entities + summary_length, vocab_size]: the first block
    is weighted by the source's entity-presence bag, the second is a one-hot
    per-position bias. Logits for step t are bag @ theta[:n] + theta[n + t].
    """

    theta: np.ndarray
    adam_m: np.ndarray
    adam_v: np.ndarray
    step_count: int
    n_entities: int
    summary_length: int

    @classmethod
    def initial(cls, task: SyntheticTask) -> "PolicyState":
        feature_dim = task.n_entities + task.summary_length
        shape = (feature_dim, task.vocab_size)
        return cls(
            theta=np.zeros(shape),
            adam_m=np.zeros(shape),
            adam_v=np.zeros(shape),
            step_count=0,
            n_entities=task.n_entities,
            summary_length=task.summary_length,
        )

    @property
    def vocab_size(self) -> int:
        return self.theta.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-2
    batch_size: int = 32
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    normalize_rewards: bool = True
    regen_interval: int = 500
    max_updates: int = 5000
    seed: int = 0
    val_size: int = 100

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.regen_interval < 1:
            raise ValueError("regen_interval must be >= 1")


@dataclass
class RewardBatch:
    raw: list[float]
    normalized: list[float]


@dataclass
class TrainResult:
    policy: PolicyState  # checkpoint with the best validation EHI
    log: list[dict]
    best_update: int
    best_val_ehi: float


def generate_task_instance(task: SyntheticTask, rng: np.random.Generator) -> TaskInstance:
    """Draw one source: distinct entities (1-3 mentions each) shuffled into filler."""
    ids = rng.choice(task.n_entities, size=task.entities_per_source, replace=False)
    tokens: list[str] = []
    counts: dict[str, int] = {}
    for eid in ids:
        key = task.entity_keys[int(eid)]
        c = int(rng.integers(1, 4))
        counts[key] = c
        tokens.extend([key] * c)
    n_fillers = task.source_length - len(tokens)
    filler_ids = rng.integers(0, len(task.filler_vocab), size=n_fillers)
    tokens.extend(task.filler_vocab[int(i)] for i in filler_ids)
    order = rng.permutation(len(tokens))
    tokens = [tokens[int(i)] for i in order]
    bag = np.zeros(task.n_entities)
    bag[ids] = 1.0
    return TaskInstance(
        source_text=" ".join(tokens),
        source_tokens=tuple(tokens),
        reference_entities=tuple(task.entity_keys[int(i)] for i in sorted(ids)),
        entity_counts=counts,
        bag=bag,
    )


@dataclass(frozen=True)
class _TrainInstance:
    """Training-loop view of an instance: only what sampling and scoring read."""

    bag: np.ndarray
    entity_counts: dict[str, int]


def _generate_instance_batch(
    task: SyntheticTask, rng: np.random.Generator, n: int
) -> tuple[list[_TrainInstance], np.ndarray]:
    """Draw n instances with batched rng calls; same distribution as the public op.

    Token order and filler placement are irrelevant to the reward (the metric
    sees entity counts only), so the shuffled text is never materialized here.
    """
    k = task.entities_per_source
    ids = np.argsort(rng.random((n, task.n_entities)), axis=1)[:, :k]
    counts = rng.integers(1, 4, size=(n, k))
    bags = np.zeros((n, task.n_entities))
    np.put_along_axis(bags, ids, 1.0, axis=1)
    instances = [
        _TrainInstance(
            bag=bags[i],
            entity_counts={
                task.entity_keys[int(ids[i, j])]: int(counts[i, j]) for j in range(k)
            },
        )
        for i in range(n)
    ]
    return instances, bags


def _position_logits(policy: PolicyState, bag: np.ndarray) -> np.ndarray:
    """Logits for every generation step at once, shape [summary_length, vocab]."""
    base = bag @ policy.theta[: policy.n_entities]
    return base[None, :] + policy.theta[policy.n_entities :]


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def sample_summary(
    policy: PolicyState,
    source_features: np.ndarray,
    summary_length: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float]:
    """Sample one summary autoregressively; returns (token ids, total log-prob)."""
    if summary_length > policy.summary_length:
        raise ValueError("summary_length exceeds the policy's position features")
    logp = _log_softmax(_position_logits(policy, source_features)[:summary_length])
    probs = np.exp(logp)
    tokens = np.empty(summary_length, dtype=np.int64)
    total = 0.0
    for t in range(summary_length):
        u = rng.random()
        idx = int(np.searchsorted(np.cumsum(probs[t]), u, side="right"))
        idx = min(idx, policy.vocab_size - 1)
        tokens[t] = idx
        total += float(logp[t, idx])
    return tokens, total


def summary_log_prob(policy: PolicyState, source_features: np.ndarray, tokens: np.ndarray) -> float:
    """Recompute the log-probability the policy assigns to a token sequence."""
    logp = _log_softmax(_position_logits(policy, source_features)[: len(tokens)])
    return float(logp[np.arange(len(tokens)), tokens].sum())


def grad_log_prob(policy: PolicyState, source_features: np.ndarray, tokens: np.ndarray) -> np.ndarray:
    """Analytic gradient of log p(tokens | features) w.r.t. theta."""
    length = len(tokens)
    logits = _position_logits(policy, source_features)[:length]
    probs = np.exp(_log_softmax(logits))
    delta = -probs
    delta[np.arange(length), tokens] += 1.0
    grad = np.zeros_like(policy.theta)
    grad[: policy.n_entities] = np.outer(source_features, delta.sum(axis=0))
    grad[policy.n_entities : policy.n_entities + length] = delta
    return grad


def greedy_summary(policy: PolicyState, source_features: np.ndarray, summary_length: int) -> np.ndarray:
    """Argmax decoding, used for evaluation snapshots."""
    logits = _position_logits(policy, source_features)[:summary_length]
    return logits.argmax(axis=1)


def normalize_rewards(raw: Sequence[float], eps: float = 1e-8) -> list[float]:
    """Standardize a reward batch: (r - mean) / (population std + eps).

    A single-element batch maps to [0], as does any zero-variance batch, so a
    degenerate batch contributes no gradient.
    """
    arr = np.asarray(raw, dtype=float)
    if arr.size == 0:
        return []
    mean = arr.mean()
    std = arr.std()
    return list((arr - mean) / (std + eps))


def reinforce_update(
    policy: PolicyState,
    batch: Sequence[tuple[np.ndarray, np.ndarray, float]],
    config: TrainConfig = TrainConfig(),
) -> PolicyState:
    """One REINFORCE + Adam step from (source_features, sampled tokens, reward) triples.

    Minimizes the surrogate loss -(1/B) sum_i r_i * log p(y_i | x_i); Adam uses
    bias-corrected moments. Mutates ``policy`` in place and returns it.
    """
    grad = np.zeros_like(policy.theta)
    for source_features, tokens, reward in batch:
        if reward != 0.0:
            grad += reward * grad_log_prob(policy, source_features, tokens)
    grad /= -len(batch)
    return _adam_step(policy, grad, config)


def _adam_step(policy: PolicyState, grad: np.ndarray, config: TrainConfig) -> PolicyState:
    if not np.isfinite(grad).all():
        raise NumericalDivergence("non-finite gradient", _dump_state(policy))
    policy.step_count += 1
    t = policy.step_count
    policy.adam_m = config.beta1 * policy.adam_m + (1 - config.beta1) * grad
    policy.adam_v = config.beta2 * policy.adam_v + (1 - config.beta2) * grad**2
    m_hat = policy.adam_m / (1 - config.beta1**t)
    v_hat = policy.adam_v / (1 - config.beta2**t)
    policy.theta = policy.theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)
    if not np.isfinite(policy.theta).all():
        raise NumericalDivergence("non-finite parameters after update", _dump_state(policy))
    return policy


def _dump_state(policy: PolicyState) -> dict:
    return {
        "step_count": policy.step_count,
        "theta_abs_max": float(np.abs(policy.theta).max()),
        "theta_finite": bool(np.isfinite(policy.theta).all()),
        "adam_m_abs_max": float(np.abs(policy.adam_m).max()),
        "adam_v_max": float(policy.adam_v.max()),
    }


def _training_metric_config() -> MetricConfig:
    return MetricConfig(reference_mode=ReferenceMode.REFERENCE_FREE, heuristics_enabled=False)


def _summary_counts(task: SyntheticTask, tokens: np.ndarray) -> dict[str, int]:
    counts: dict[str, int] = {}
    for t in tokens:
        tid = int(t)
        if tid < task.n_entities:
            key = task.entity_keys[tid]
            counts[key] = counts.get(key, 0) + 1
    return counts


def score_tokens(
    task: SyntheticTask,
    instance,
    tokens: np.ndarray,
    config: MetricConfig | None = None,
) -> float:
    """EHI of a generated token-id sequence against its source instance.

    Token ids below n_entities are entity mentions by construction, so the
    summary's entity counts are read off directly; the component and score
    math is the shared metric path. Equivalent to rendering the tokens as text
    and re-extracting (pinned by a test).
    """
    cfg = config or _training_metric_config()
    components = compute_components(
        KeyCounts(instance.entity_counts), KeyCounts(_summary_counts(task, tokens)), None, cfg
    )
    return ehi_from_components(components)


def _entity_f1_of_tokens(task: SyntheticTask, instance: TaskInstance, tokens: np.ndarray) -> float:
    e_sum = KeyCounts(_summary_counts(task, tokens))
    e_ref = KeyCounts({k: 1 for k in instance.reference_entities})
    return entity_f1(e_ref, e_sum)[2]


def evaluate_policy(
    policy: PolicyState,
    task: SyntheticTask,
    n_instances: int,
    seed: int,
) -> dict[str, float]:
    """Greedy-decode ``n_instances`` fresh instances; mean EHI and mean entity F1.

    This is also the pre-training baseline oracle: run it on the initial
    policy before any updates.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xE7A1]))
    instances = [generate_task_instance(task, rng) for _ in range(n_instances)]
    return _evaluate_on(policy, task, instances)


def _evaluate_on(policy: PolicyState, task: SyntheticTask, instances: list[TaskInstance]) -> dict[str, float]:
    cfg = _training_metric_config()
    ehis = []
    f1s = []
    for inst in instances:
        tokens = greedy_summary(policy, inst.bag, task.summary_length)
        ehis.append(score_tokens(task, inst, tokens, cfg))
        f1s.append(_entity_f1_of_tokens(task, inst, tokens))
    return {"mean_ehi": float(np.mean(ehis)), "mean_f1": float(np.mean(f1s))}


def _sample_batch(
    policy: PolicyState,
    bags: np.ndarray,
    summary_length: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized sampling: (tokens [B, L], log_probs [B], probs [L, B, V])."""
    batch = bags.shape[0]
    base = bags @ policy.theta[: policy.n_entities]  # [B, V]
    pos = policy.theta[policy.n_entities : policy.n_entities + summary_length]
    tokens = np.empty((batch, summary_length), dtype=np.int64)
    log_probs = np.zeros(batch)
    probs = np.empty((summary_length, batch, policy.vocab_size))
    rows = np.arange(batch)
    for t in range(summary_length):
        logp = _log_softmax(base + pos[t])
        probs[t] = np.exp(logp)
        cum = np.cumsum(probs[t], axis=1)
        idx = (cum < rng.random(batch)[:, None]).sum(axis=1)
        idx = np.minimum(idx, policy.vocab_size - 1)
        tokens[:, t] = idx
        log_probs += logp[rows, idx]
    return tokens, log_probs, probs


def _batched_update(
    policy: PolicyState,
    bags: np.ndarray,
    tokens: np.ndarray,
    rewards: np.ndarray,
    config: TrainConfig,
    probs: np.ndarray,
) -> None:
    """Same math as reinforce_update, vectorized over the batch.

    ``probs`` are the per-position distributions the tokens were sampled from
    (theta has not moved since), so the softmax is not recomputed.
    """
    batch, length = tokens.shape
    grad = np.zeros_like(policy.theta)
    rows = np.arange(batch)
    weighted_delta_sum = np.zeros((batch, policy.vocab_size))
    for t in range(length):
        delta = -probs[t] * rewards[:, None]
        delta[rows, tokens[:, t]] += rewards
        grad[policy.n_entities + t] = delta.sum(axis=0)
        weighted_delta_sum += delta
    grad[: policy.n_entities] = bags.T @ weighted_delta_sum
    grad /= -batch
    _adam_step(policy, grad, config)


def train(
    task: SyntheticTask = SyntheticTask(),
    config: TrainConfig = TrainConfig(),
    gazetteer=None,
) -> TrainResult:
    """Full loop: sample -> score -> normalize -> update, with periodic snapshots.

    Every ``regen_interval`` updates (plus before training and at the end) the
    held-out validation instances are re-summarized greedily and logged; the
    returned policy is the snapshot with the best mean validation EHI. The
    ``gazetteer`` argument is accepted for symmetry with text-based scoring but
    the synthetic task scores via its own vocabulary mapping.
    """
    del gazetteer
    root = np.random.SeedSequence([config.seed, task.seed])
    inst_ss, sample_ss, val_ss = root.spawn(3)
    rng_inst = np.random.default_rng(inst_ss)
    rng_sample = np.random.default_rng(sample_ss)
    rng_val = np.random.default_rng(val_ss)

    policy = PolicyState.initial(task)
    val_instances = [generate_task_instance(task, rng_val) for _ in range(config.val_size)]

    log: list[dict] = []
    reward_accum: list[float] = []

    def snapshot(update: int) -> dict:
        stats = _evaluate_on(policy, task, val_instances)
        entry = {
            "update": update,
            "mean_val_ehi": stats["mean_ehi"],
            "mean_val_f1": stats["mean_f1"],
            "mean_reward_raw": float(np.mean(reward_accum)) if reward_accum else None,
        }
        log.append(entry)
        reward_accum.clear()
        return entry

    entry = snapshot(0)
    best_policy = copy.deepcopy(policy)
    best_update = 0
    best_val_ehi = entry["mean_val_ehi"]

    for update in range(1, config.max_updates + 1):
        instances, bags = _generate_instance_batch(task, rng_inst, config.batch_size)
        tokens, _, probs = _sample_batch(policy, bags, task.summary_length, rng_sample)
        raw = [score_tokens(task, inst, tokens[i]) for i, inst in enumerate(instances)]
        batch = RewardBatch(
            raw=raw,
            normalized=normalize_rewards(raw) if config.normalize_rewards else list(raw),
        )
        reward_accum.extend(batch.raw)
        _batched_update(policy, bags, tokens, np.asarray(batch.normalized), config, probs)

        if update % config.regen_interval == 0 or update == config.max_updates:
            entry = snapshot(update)
            if entry["mean_val_ehi"] > best_val_ehi:
                best_val_ehi = entry["mean_val_ehi"]
                best_update = update
                best_policy = copy.deepcopy(policy)

    return TrainResult(policy=best_policy, log=log, best_update=best_update, best_val_ehi=best_val_ehi)


def save_checkpoint(policy: PolicyState, path) -> None:
    """Write theta as versioned JSON (flat row-major array plus shape fields)."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "n_entities": policy.n_entities,
        "summary_length": policy.summary_length,
        "vocab_size": policy.vocab_size,
        "step_count": policy.step_count,
        "theta": [float(x) for x in policy.theta.ravel()],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_checkpoint(path) -> PolicyState:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != CHECKPOINT_FORMAT or payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unrecognized checkpoint header in {path}")
    feature_dim = payload["n_entities"] + payload["summary_length"]
    theta = np.asarray(payload["theta"], dtype=float).reshape(feature_dim, payload["vocab_size"])
    return PolicyState(
        theta=theta,
        adam_m=np.zeros_like(theta),
        adam_v=np.zeros_like(theta),
        step_count=payload.get("step_count", 0),
        n_entities=payload["n_entities"],
        summary_length=payload["summary_length"],
    )
