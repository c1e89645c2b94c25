/** Newline-delimited JSON client for the EHI reward service over TCP.
 *
 * One JSON object per line each way; the service answers a connection's
 * requests strictly in order, so responses are matched to the oldest pending
 * request and the echoed id is verified.
 */

import * as net from "node:net";

export interface EhiReportWire {
  ehi: number;
  ph: number;
  ef: number;
  nh: number;
  of: number;
  lf: number;
  entity_precision: number;
  entity_recall: number;
  entity_f1: number;
  grounded_keys: string[];
  hallucinated_keys: string[];
  omitted_important_keys: string[];
  reference_used: boolean;
}

export interface ScoreParams {
  source?: string;
  summary?: string;
  reference?: string;
  entities_source?: string[];
  entities_summary?: string[];
}

interface Pending {
  id: string;
  resolve: (value: unknown) => void;
  reject: (err: Error) => void;
}

export class RewardServiceError extends Error {
  constructor(
    public code: string,
    message: string,
  ) {
    super(`${code}: ${message}`);
  }
}

export class RewardClient {
  private buffer = "";
  private pending: Pending[] = [];
  private nextId = 1;
  scoreBatchRequests = 0;

  private constructor(private socket: net.Socket) {
    socket.setEncoding("utf-8");
    socket.on("data", (chunk: string) => this.onData(chunk));
    socket.on("error", (err) => this.failAll(err));
    socket.on("close", () => this.failAll(new Error("connection closed")));
  }

  static connect(host: string, port: number, timeoutMs = 10_000): Promise<RewardClient> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port });
      const timer = setTimeout(() => {
        socket.destroy();
        reject(new Error(`timed out connecting to ${host}:${port}`));
      }, timeoutMs);
      socket.once("connect", () => {
        clearTimeout(timer);
        resolve(new RewardClient(socket));
      });
      socket.once("error", (err) => {
        clearTimeout(timer);
        reject(new Error(`cannot reach reward service at ${host}:${port}: ${err.message}`));
      });
    });
  }

  private onData(chunk: string): void {
    this.buffer += chunk;
    let idx: number;
    while ((idx = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, idx);
      this.buffer = this.buffer.slice(idx + 1);
      const waiter = this.pending.shift();
      if (!waiter) continue; // unsolicited line; nothing to deliver it to
      let obj: { id?: string; ok?: boolean; result?: unknown; error?: { code: string; message: string } };
      try {
        obj = JSON.parse(line);
      } catch {
        waiter.reject(new Error(`unparseable response line: ${line.slice(0, 120)}`));
        continue;
      }
      if (obj.id !== waiter.id) {
        waiter.reject(new Error(`response id ${obj.id} does not match request id ${waiter.id}`));
      } else if (obj.ok && obj.result !== undefined) {
        waiter.resolve(obj.result);
      } else {
        const err = obj.error ?? { code: "unknown", message: "missing error body" };
        waiter.reject(new RewardServiceError(err.code, err.message));
      }
    }
  }

  private failAll(err: Error): void {
    const waiting = this.pending;
    this.pending = [];
    for (const w of waiting) w.reject(err);
  }

  request(method: string, params: unknown): Promise<unknown> {
    const id = `a${this.nextId++}`;
    return new Promise((resolve, reject) => {
      this.pending.push({ id, resolve, reject });
      this.socket.write(JSON.stringify({ id, method, params }) + "\n");
    });
  }

  async ping(): Promise<{ version: string }> {
    return (await this.request("ping", {})) as { version: string };
  }

  async scoreBatch(pairs: ScoreParams[]): Promise<EhiReportWire[]> {
    this.scoreBatchRequests += 1;
    const result = (await this.request("score_batch", { pairs })) as { reports: EhiReportWire[] };
    return result.reports;
  }

  close(): void {
    this.socket.removeAllListeners("close");
    this.socket.removeAllListeners("error");
    this.failAll(new Error("client closed"));
    this.socket.destroy();
  }
}

export function parseServiceAddress(address: string): { host: string; port: number } {
  const idx = address.lastIndexOf(":");
  if (idx < 0) return { host: address, port: 7431 };
  const host = address.slice(0, idx) || "127.0.0.1";
  const port = Number(address.slice(idx + 1));
  if (!Number.isInteger(port) || port <= 0 || port > 65535) {
    throw new Error(`bad service address: ${address}`);
  }
  return { host, port };
}
