/** A tiny self-contained encoder-decoder for smoke-scale reward loops.
 *
 * Encoder: mean of source-token embeddings. Decoder: autoregressive linear
 * softmax over [sourceState; previousTokenEmbedding]. Gradients are exact and
 * hand-derived, so the REINFORCE update needs no ML runtime; checkpoints are
 * plain JSON. The "tiny" model identifier builds a fresh seeded model over
 * the corpus vocabulary; identifiers ending in .json load a checkpoint.
 */

import * as fs from "node:fs";

import { AdamState, Rng, adamInit, adamStep, logSoftmax, mulberry32, sampleIndex } from "./math.js";

export const CHECKPOINT_FORMAT = "ehi-adapter-seq2seq";
export const CHECKPOINT_VERSION = 1;

export interface SampleResult {
  tokenIds: number[];
  logProb: number;
  /** per-step caches needed by the gradient: previous token id and log-probs */
  steps: { prevId: number; logProbs: Float64Array; chosen: number }[];
  srcIds: number[];
}

export class TinySeq2Seq {
  readonly vocabSize: number;
  readonly tokenToId: Map<string, number>;
  private readonly adamEmb: AdamState;
  private readonly adamW: AdamState;
  private readonly adamB: AdamState;

  constructor(
    readonly vocab: string[],
    readonly dim: number,
    readonly emb: Float64Array, // (vocabSize + 1) x dim; last row is the start token
    readonly wOut: Float64Array, // (2 * dim) x vocabSize
    readonly bOut: Float64Array, // vocabSize
  ) {
    this.vocabSize = vocab.length;
    this.tokenToId = new Map(vocab.map((t, i) => [t, i]));
    this.adamEmb = adamInit(emb.length);
    this.adamW = adamInit(wOut.length);
    this.adamB = adamInit(bOut.length);
  }

  static fresh(vocab: string[], dim: number, seed: number): TinySeq2Seq {
    if (vocab.length === 0) throw new Error("cannot build a model over an empty vocabulary");
    const rng = mulberry32(seed ^ 0x5eed);
    const init = (n: number, scale: number) => {
      const arr = new Float64Array(n);
      for (let i = 0; i < n; i++) arr[i] = (rng() * 2 - 1) * scale;
      return arr;
    };
    return new TinySeq2Seq(
      vocab,
      dim,
      init((vocab.length + 1) * dim, 0.1),
      init(2 * dim * vocab.length, 0.1),
      new Float64Array(vocab.length),
    );
  }

  static fromIdentifier(identifier: string, corpusVocab: string[], dim: number, seed: number): TinySeq2Seq {
    if (identifier.endsWith(".json")) return TinySeq2Seq.load(identifier);
    if (identifier !== "tiny") {
      throw new Error(`unknown model identifier ${identifier}; use "tiny" or a .json checkpoint path`);
    }
    return TinySeq2Seq.fresh(corpusVocab, dim, seed);
  }

  get startId(): number {
    return this.vocabSize;
  }

  private encode(sourceTokens: string[]): { h: Float64Array; srcIds: number[] } {
    const srcIds: number[] = [];
    for (const tok of sourceTokens) {
      const id = this.tokenToId.get(tok.toLowerCase());
      if (id !== undefined) srcIds.push(id);
    }
    const h = new Float64Array(this.dim);
    for (const id of srcIds) {
      for (let k = 0; k < this.dim; k++) h[k] += this.emb[id * this.dim + k];
    }
    if (srcIds.length > 0) {
      for (let k = 0; k < this.dim; k++) h[k] /= srcIds.length;
    }
    return { h, srcIds };
  }

  private stepLogProbs(h: Float64Array, prevId: number): Float64Array {
    const logits = new Float64Array(this.vocabSize);
    for (let v = 0; v < this.vocabSize; v++) logits[v] = this.bOut[v];
    for (let k = 0; k < this.dim; k++) {
      const hk = h[k];
      const ek = this.emb[prevId * this.dim + k];
      for (let v = 0; v < this.vocabSize; v++) {
        logits[v] += hk * this.wOut[k * this.vocabSize + v];
        logits[v] += ek * this.wOut[(this.dim + k) * this.vocabSize + v];
      }
    }
    return logSoftmax(logits);
  }

  sample(sourceTokens: string[], length: number, rng: Rng): SampleResult {
    const { h, srcIds } = this.encode(sourceTokens);
    const steps: SampleResult["steps"] = [];
    const tokenIds: number[] = [];
    let prevId = this.startId;
    let logProb = 0;
    for (let t = 0; t < length; t++) {
      const logProbs = this.stepLogProbs(h, prevId);
      const chosen = sampleIndex(logProbs, rng);
      steps.push({ prevId, logProbs, chosen });
      tokenIds.push(chosen);
      logProb += logProbs[chosen];
      prevId = chosen;
    }
    return { tokenIds, logProb, steps, srcIds };
  }

  logProbOf(sourceTokens: string[], tokenIds: number[]): number {
    return this.replay(sourceTokens, tokenIds).logProb;
  }

  /** Rebuild the per-step caches for fixed token ids under current parameters. */
  replay(sourceTokens: string[], tokenIds: number[]): SampleResult {
    const { h, srcIds } = this.encode(sourceTokens);
    const steps: SampleResult["steps"] = [];
    let prevId = this.startId;
    let logProb = 0;
    for (const id of tokenIds) {
      const logProbs = this.stepLogProbs(h, prevId);
      steps.push({ prevId, logProbs, chosen: id });
      logProb += logProbs[id];
      prevId = id;
    }
    return { tokenIds: [...tokenIds], logProb, steps, srcIds };
  }

  decode(tokenIds: number[]): string {
    return tokenIds.map((id) => this.vocab[id]).join(" ");
  }

  /**
   * Gradient of sum_i weight_i * logProb_i with respect to all parameters.
   * Exposed for finite-difference testing; reinforceStep wraps it.
   */
  weightedLogProbGrad(samples: SampleResult[], weights: number[]): {
    gEmb: Float64Array;
    gW: Float64Array;
    gB: Float64Array;
  } {
    const gEmb = new Float64Array(this.emb.length);
    const gW = new Float64Array(this.wOut.length);
    const gB = new Float64Array(this.bOut.length);
    const V = this.vocabSize;

    samples.forEach((sample, si) => {
      const weight = weights[si];
      if (weight === 0) return;
      const { h } = this.encodeFromIds(sample.srcIds);
      const gH = new Float64Array(this.dim);
      for (const step of sample.steps) {
        const delta = new Float64Array(V);
        for (let v = 0; v < V; v++) delta[v] = -Math.exp(step.logProbs[v]) * weight;
        delta[step.chosen] += weight;
        for (let v = 0; v < V; v++) gB[v] += delta[v];
        for (let k = 0; k < this.dim; k++) {
          const hk = h[k];
          const ek = this.emb[step.prevId * this.dim + k];
          let dH = 0;
          let dE = 0;
          for (let v = 0; v < V; v++) {
            const d = delta[v];
            gW[k * V + v] += hk * d;
            gW[(this.dim + k) * V + v] += ek * d;
            dH += this.wOut[k * V + v] * d;
            dE += this.wOut[(this.dim + k) * V + v] * d;
          }
          gH[k] += dH;
          gEmb[step.prevId * this.dim + k] += dE;
        }
      }
      if (sample.srcIds.length > 0) {
        const scale = 1 / sample.srcIds.length;
        for (const id of sample.srcIds) {
          for (let k = 0; k < this.dim; k++) gEmb[id * this.dim + k] += gH[k] * scale;
        }
      }
    });
    return { gEmb, gW, gB };
  }

  private encodeFromIds(srcIds: number[]): { h: Float64Array } {
    const h = new Float64Array(this.dim);
    for (const id of srcIds) {
      for (let k = 0; k < this.dim; k++) h[k] += this.emb[id * this.dim + k];
    }
    if (srcIds.length > 0) {
      for (let k = 0; k < this.dim; k++) h[k] /= srcIds.length;
    }
    return { h };
  }

  /**
   * One REINFORCE step: minimize -(1/B) * sum_i reward_i * logProb_i with
   * Adam. Returns the surrogate loss value; throws on non-finite values.
   */
  reinforceStep(samples: SampleResult[], rewards: number[], learningRate: number): number {
    const batch = samples.length;
    if (batch === 0) throw new Error("empty batch");
    const { gEmb, gW, gB } = this.weightedLogProbGrad(samples, rewards);
    const scale = -1 / batch;
    let loss = 0;
    for (let i = 0; i < batch; i++) loss += rewards[i] * samples[i].logProb;
    loss *= scale;
    if (!Number.isFinite(loss)) throw new Error(`non-finite loss ${loss}`);
    for (const g of [gEmb, gW, gB]) {
      for (let i = 0; i < g.length; i++) {
        g[i] *= scale;
        if (!Number.isFinite(g[i])) throw new Error("non-finite gradient");
      }
    }
    adamStep(this.emb, gEmb, this.adamEmb, learningRate);
    adamStep(this.wOut, gW, this.adamW, learningRate);
    adamStep(this.bOut, gB, this.adamB, learningRate);
    return loss;
  }

  /** Parameter snapshot with fresh optimizer state (for best-checkpoint saves). */
  clone(): TinySeq2Seq {
    return new TinySeq2Seq(
      [...this.vocab],
      this.dim,
      Float64Array.from(this.emb),
      Float64Array.from(this.wOut),
      Float64Array.from(this.bOut),
    );
  }

  save(path: string): void {
    const payload = {
      format: CHECKPOINT_FORMAT,
      version: CHECKPOINT_VERSION,
      dim: this.dim,
      vocab: this.vocab,
      emb: Array.from(this.emb),
      wOut: Array.from(this.wOut),
      bOut: Array.from(this.bOut),
    };
    fs.writeFileSync(path, JSON.stringify(payload) + "\n");
  }

  static load(path: string): TinySeq2Seq {
    const payload = JSON.parse(fs.readFileSync(path, "utf-8"));
    if (payload.format !== CHECKPOINT_FORMAT || payload.version !== CHECKPOINT_VERSION) {
      throw new Error(`unrecognized checkpoint header in ${path}`);
    }
    return new TinySeq2Seq(
      payload.vocab,
      payload.dim,
      Float64Array.from(payload.emb),
      Float64Array.from(payload.wOut),
      Float64Array.from(payload.bOut),
    );
  }
}

/** Sorted unique lowercase words across all corpus sources. */
export function buildVocab(sources: string[]): string[] {
  const words = new Set<string>();
  for (const text of sources) {
    for (const tok of text.split(/\s+/u)) {
      if (tok) words.add(tok.toLowerCase());
    }
  }
  return Array.from(words).sort();
}
