/** End-to-end smoke test against the real Python reward service.
 *
 * Skipped automatically when python3 or the ehikit package is unavailable.
 */

import { type ChildProcess, spawn, spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as net from "node:net";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { DEFAULT_CONFIG, runAdapter } from "../src/adapter";

const REPO_ROOT = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..", "..");
const PY_ENV = { ...process.env, PYTHONPATH: path.join(REPO_ROOT, "src") };
const GAZETTEER = path.join(REPO_ROOT, "src", "ehikit", "data", "default_gazetteer.tsv");

const pythonOk =
  spawnSync("python3", ["-c", "import ehikit"], { env: PY_ENV }).status === 0;

const CORPUS_ROWS = [
  { id: "r1", source: "alice met bob at the meeting. alice raised concerns" },
  { id: "r2", source: "oracle and microsoft discussed the contract" },
  { id: "r3", source: "carol presented the budget report to dave" },
  { id: "r4", source: "the team agreed on the launch timeline with erin" },
];

function startRealService(): Promise<{ proc: ChildProcess; port: number }> {
  return new Promise((resolve, reject) => {
    const proc = spawn(
      "python3",
      ["-m", "ehikit", "serve", "--listen", "127.0.0.1:0", "--gazetteer", GAZETTEER],
      { env: PY_ENV },
    );
    let stderr = "";
    const timer = setTimeout(() => {
      proc.kill();
      reject(new Error(`service did not announce its port; stderr: ${stderr}`));
    }, 20_000);
    proc.stderr!.on("data", (chunk) => {
      stderr += chunk.toString();
      const match = stderr.match(/listening on [^:]+:(\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve({ proc, port: Number(match[1]) });
      }
    });
    proc.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`service exited early with code ${code}; stderr: ${stderr}`));
    });
  });
}

async function freePort(): Promise<number> {
  return new Promise((resolve) => {
    const srv = net.createServer();
    srv.listen(0, "127.0.0.1", () => {
      const port = (srv.address() as net.AddressInfo).port;
      srv.close(() => resolve(port));
    });
  });
}

describe.skipIf(!pythonOk)("adapter against the real reward service", () => {
  let service: { proc: ChildProcess; port: number };
  let workDir: string;
  let corpusPath: string;

  beforeAll(async () => {
    service = await startRealService();
    workDir = fs.mkdtempSync(path.join(os.tmpdir(), "ehi-adapter-int-"));
    corpusPath = path.join(workDir, "corpus.jsonl");
    fs.writeFileSync(corpusPath, CORPUS_ROWS.map((r) => JSON.stringify(r)).join("\n") + "\n");
  }, 30_000);

  afterAll(() => {
    service?.proc.kill();
    if (workDir) fs.rmSync(workDir, { recursive: true, force: true });
  });

  it("completes one update with a finite loss and a score_batch round-trip", async () => {
    const metricsPath = path.join(workDir, "metrics.jsonl");
    const result = await runAdapter(
      {
        ...DEFAULT_CONFIG,
        service: `127.0.0.1:${service.port}`,
        updates: 1,
        batchSize: 4,
        seed: 11,
        metricsOut: metricsPath,
      },
      corpusPath,
    );
    expect(result.updates).toBe(1);
    expect(Number.isFinite(result.final_loss)).toBe(true);
    expect(result.score_batch_requests).toBeGreaterThanOrEqual(1);

    const lines = fs.readFileSync(metricsPath, "utf-8").trim().split("\n");
    expect(lines).toHaveLength(1);
    const entry = JSON.parse(lines[0]);
    expect(Object.keys(entry).sort()).toEqual([
      "mean_reward_raw",
      "mean_val_ehi",
      "mean_val_f1",
      "update",
    ]);
  }, 60_000);

  it("runs several updates and keeps rewards in [0, 1]", async () => {
    const result = await runAdapter(
      {
        ...DEFAULT_CONFIG,
        service: `127.0.0.1:${service.port}`,
        updates: 5,
        batchSize: 4,
        seed: 7,
      },
      corpusPath,
    );
    expect(result.metrics).toHaveLength(5);
    for (const entry of result.metrics) {
      expect(entry.mean_reward_raw).toBeGreaterThanOrEqual(0);
      expect(entry.mean_reward_raw).toBeLessThanOrEqual(1);
    }
  }, 60_000);

  it("aborts cleanly when the service is unreachable", async () => {
    const deadPort = await freePort();
    await expect(
      runAdapter(
        { ...DEFAULT_CONFIG, service: `127.0.0.1:${deadPort}`, updates: 1, seed: 0 },
        corpusPath,
      ),
    ).rejects.toThrow(/cannot reach reward service/);
  });
});
