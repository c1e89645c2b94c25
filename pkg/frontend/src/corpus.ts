/** Minimal JSONL corpus reader: one {id, source, ...} object per line. */

import * as fs from "node:fs";

export interface CorpusRecord {
  id: string;
  source: string;
}

export function readCorpus(path: string): CorpusRecord[] {
  const text = fs.readFileSync(path, "utf-8");
  const records: CorpusRecord[] = [];
  const seen = new Set<string>();
  text.split("\n").forEach((line, i) => {
    if (!line.trim()) return;
    let obj: { id?: unknown; source?: unknown };
    try {
      obj = JSON.parse(line);
    } catch {
      throw new Error(`${path}:${i + 1}: invalid JSON`);
    }
    if (typeof obj.id !== "string" || !obj.id) throw new Error(`${path}:${i + 1}: missing id`);
    if (typeof obj.source !== "string" || !obj.source) throw new Error(`${path}:${i + 1}: missing source`);
    if (seen.has(obj.id)) throw new Error(`${path}:${i + 1}: duplicate id ${obj.id}`);
    seen.add(obj.id);
    records.push({ id: obj.id, source: obj.source });
  });
  if (records.length === 0) throw new Error(`${path}: empty corpus`);
  return records;
}
