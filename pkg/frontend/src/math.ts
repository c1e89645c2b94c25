/** Shared numeric helpers: seeded PRNG, softmax, reward normalization, Adam. */

export type Rng = () => number;

/** Deterministic 32-bit PRNG (mulberry32); returns floats in [0, 1). */
export function mulberry32(seed: number): Rng {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Log-softmax over a plain array, numerically stable for any finite logits. */
export function logSoftmax(logits: Float64Array): Float64Array {
  let max = -Infinity;
  for (const v of logits) max = Math.max(max, v);
  let sum = 0;
  for (const v of logits) sum += Math.exp(v - max);
  const logZ = max + Math.log(sum);
  const out = new Float64Array(logits.length);
  for (let i = 0; i < logits.length; i++) out[i] = logits[i] - logZ;
  return out;
}

/** Sample an index from log-probabilities via inverse CDF. */
export function sampleIndex(logProbs: Float64Array, rng: Rng): number {
  const u = rng();
  let cum = 0;
  for (let i = 0; i < logProbs.length; i++) {
    cum += Math.exp(logProbs[i]);
    if (u < cum) return i;
  }
  return logProbs.length - 1;
}

/**
 * Standardize a reward batch: (r - mean) / (population std + eps).
 * Single-element and zero-variance batches map to all zeros, matching the
 * reward service trainer's convention, so degenerate batches are no-ops.
 */
export function normalizeRewards(raw: number[], eps = 1e-8): number[] {
  if (raw.length === 0) return [];
  const mean = raw.reduce((a, b) => a + b, 0) / raw.length;
  const variance = raw.reduce((a, b) => a + (b - mean) ** 2, 0) / raw.length;
  const std = Math.sqrt(variance);
  return raw.map((r) => (r - mean) / (std + eps));
}

export interface AdamState {
  m: Float64Array;
  v: Float64Array;
  step: number;
}

export function adamInit(size: number): AdamState {
  return { m: new Float64Array(size), v: new Float64Array(size), step: 0 };
}

/** One bias-corrected Adam step applied in place to `params`. */
export function adamStep(
  params: Float64Array,
  grad: Float64Array,
  state: AdamState,
  lr: number,
  beta1 = 0.9,
  beta2 = 0.999,
  eps = 1e-8,
): void {
  state.step += 1;
  const c1 = 1 - beta1 ** state.step;
  const c2 = 1 - beta2 ** state.step;
  for (let i = 0; i < params.length; i++) {
    state.m[i] = beta1 * state.m[i] + (1 - beta1) * grad[i];
    state.v[i] = beta2 * state.v[i] + (1 - beta2) * grad[i] * grad[i];
    params[i] -= (lr * (state.m[i] / c1)) / (Math.sqrt(state.v[i] / c2) + eps);
  }
}

export function mean(values: number[]): number {
  return values.length === 0 ? 0 : values.reduce((a, b) => a + b, 0) / values.length;
}
