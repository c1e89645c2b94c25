/** Command-line entry for the reward-loop adapter.
 *
 * Usage:
 *   node dist/cli.js --corpus corpus.jsonl --service 127.0.0.1:7431 \
 *     --updates 1 --batch-size 4 --seed 11 [--metrics-out metrics.jsonl]
 *
 * Prints one JSON summary line to stdout on success; diagnostics on stderr.
 */

import { parseArgs } from "node:util";

import { DEFAULT_CONFIG, runAdapter } from "./adapter.js";

async function main(): Promise<number> {
  const { values } = parseArgs({
    options: {
      corpus: { type: "string" },
      service: { type: "string", default: DEFAULT_CONFIG.service },
      model: { type: "string", default: DEFAULT_CONFIG.model },
      "learning-rate": { type: "string", default: String(DEFAULT_CONFIG.learningRate) },
      "batch-size": { type: "string", default: String(DEFAULT_CONFIG.batchSize) },
      updates: { type: "string", default: String(DEFAULT_CONFIG.updates) },
      "summary-length": { type: "string", default: String(DEFAULT_CONFIG.summaryLength) },
      "max-source-tokens": { type: "string", default: String(DEFAULT_CONFIG.maxSourceTokens) },
      "overlap-tokens": { type: "string", default: String(DEFAULT_CONFIG.overlapTokens) },
      seed: { type: "string" },
      "metrics-out": { type: "string", default: "" },
      "checkpoint-out": { type: "string", default: "" },
    },
  });

  if (!values.corpus) {
    console.error("error: --corpus is required");
    return 2;
  }
  if (values.seed === undefined) {
    console.error("error: --seed is required (no wall-clock seeding)");
    return 2;
  }

  const config = {
    ...DEFAULT_CONFIG,
    model: values.model!,
    service: values.service!,
    learningRate: Number(values["learning-rate"]),
    batchSize: Number(values["batch-size"]),
    updates: Number(values.updates),
    summaryLength: Number(values["summary-length"]),
    maxSourceTokens: Number(values["max-source-tokens"]),
    overlapTokens: Number(values["overlap-tokens"]),
    seed: Number(values.seed),
    metricsOut: values["metrics-out"]!,
    checkpointOut: values["checkpoint-out"]!,
  };

  try {
    const result = await runAdapter(config, values.corpus);
    console.log(
      JSON.stringify({
        updates: result.updates,
        final_loss: result.final_loss,
        score_batch_requests: result.score_batch_requests,
        mean_reward_last: result.mean_reward_last,
      }),
    );
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

main().then((code) => {
  process.exitCode = code;
});
