/** The reward-loop adapter: sample from the tiny model, fetch EHI rewards from
 * the service, apply a REINFORCE-weighted log-likelihood update.
 *
 * Rewards used for the update are the service's `ehi` fields verbatim; the
 * client never recomputes them. Long sources are cut into overlapping chunks
 * (default 950 tokens, 200 overlap) and each sampled summary is scored
 * against its own chunk.
 */

import * as fs from "node:fs";

import { DEFAULT_MAX_SOURCE_TOKENS, DEFAULT_OVERLAP_TOKENS, chunkTokens, tokenizeWhitespace } from "./chunk.js";
import { RewardClient, parseServiceAddress } from "./client.js";
import { readCorpus } from "./corpus.js";
import { mean, mulberry32, normalizeRewards } from "./math.js";
import { TinySeq2Seq, buildVocab } from "./model.js";

export interface AdapterConfig {
  /** "tiny" for a fresh seeded model over the corpus vocabulary, or a .json checkpoint path. */
  model: string;
  /** host:port of the reward service. */
  service: string;
  learningRate: number;
  batchSize: number;
  maxSourceTokens: number;
  overlapTokens: number;
  updates: number;
  summaryLength: number;
  embeddingDim: number;
  seed: number;
  /** Where to write the per-update metrics JSONL; empty string disables. */
  metricsOut: string;
  /** Optional path to save the final model checkpoint. */
  checkpointOut: string;
}

export const DEFAULT_CONFIG: AdapterConfig = {
  model: "tiny",
  service: "127.0.0.1:7431",
  learningRate: 5e-6,
  batchSize: 4,
  maxSourceTokens: DEFAULT_MAX_SOURCE_TOKENS,
  overlapTokens: DEFAULT_OVERLAP_TOKENS,
  updates: 1,
  summaryLength: 8,
  embeddingDim: 16,
  seed: 0,
  metricsOut: "",
  checkpointOut: "",
};

export interface MetricsEntry {
  update: number;
  mean_val_ehi: number;
  mean_val_f1: number;
  mean_reward_raw: number;
}

export interface AdapterResult {
  updates: number;
  final_loss: number;
  score_batch_requests: number;
  mean_reward_last: number;
  metrics: MetricsEntry[];
}

export async function runAdapter(config: AdapterConfig, corpusPath: string): Promise<AdapterResult> {
  const { host, port } = parseServiceAddress(config.service);

  // The service must answer before anything heavier happens: a dead address
  // aborts here, before the model is even constructed.
  const client = await RewardClient.connect(host, port);
  try {
    await client.ping();
    return await trainLoop(client, config, corpusPath);
  } finally {
    client.close();
  }
}

async function trainLoop(
  client: RewardClient,
  config: AdapterConfig,
  corpusPath: string,
): Promise<AdapterResult> {
  const records = readCorpus(corpusPath);
  const units = records.flatMap((rec) =>
    chunkTokens(tokenizeWhitespace(rec.source), config.maxSourceTokens, config.overlapTokens).map(
      (chunk) => chunk.tokens,
    ),
  );
  const model = TinySeq2Seq.fromIdentifier(
    config.model,
    buildVocab(records.map((r) => r.source)),
    config.embeddingDim,
    config.seed,
  );
  const rng = mulberry32(config.seed ^ 0x51a99);

  const metrics: MetricsEntry[] = [];
  let finalLoss = NaN;
  let lastRawMean = NaN;
  let bestMeanEhi = -Infinity;
  let bestModel = model.clone();

  for (let update = 1; update <= config.updates; update++) {
    const batchUnits: string[][] = [];
    for (let i = 0; i < config.batchSize; i++) {
      batchUnits.push(units[((update - 1) * config.batchSize + i) % units.length]);
    }
    const samples = batchUnits.map((unit) => model.sample(unit, config.summaryLength, rng));
    const pairs = batchUnits.map((unit, i) => ({
      source: unit.join(" "),
      summary: model.decode(samples[i].tokenIds),
    }));
    const reports = await client.scoreBatch(pairs);
    const raw = reports.map((r) => r.ehi);
    const rewards = normalizeRewards(raw);

    finalLoss = model.reinforceStep(samples, rewards, config.learningRate);
    lastRawMean = mean(raw);
    metrics.push({
      update,
      mean_val_ehi: lastRawMean,
      mean_val_f1: mean(reports.map((r) => r.entity_f1)),
      mean_reward_raw: lastRawMean,
    });
    if (lastRawMean > bestMeanEhi) {
      bestMeanEhi = lastRawMean;
      bestModel = model.clone();
    }
  }

  if (config.metricsOut) {
    fs.writeFileSync(config.metricsOut, metrics.map((m) => JSON.stringify(m)).join("\n") + "\n");
  }
  if (config.checkpointOut) {
    bestModel.save(config.checkpointOut);
  }
  return {
    updates: config.updates,
    final_loss: finalLoss,
    score_batch_requests: client.scoreBatchRequests,
    mean_reward_last: lastRawMean,
    metrics,
  };
}
