/** Fixed-stride overlapping windows over whitespace tokens.
 *
 * Window k starts at k * (maxTokens - overlapTokens) and holds up to
 * maxTokens tokens; emission stops once the end of the document is covered,
 * mirroring the scoring service's chunk arithmetic (defaults 950/200).
 */

export const DEFAULT_MAX_SOURCE_TOKENS = 950;
export const DEFAULT_OVERLAP_TOKENS = 200;

export function tokenizeWhitespace(text: string): string[] {
  return text.split(/\s+/u).filter((t) => t.length > 0);
}

export interface TokenChunk {
  index: number;
  first: number;
  last: number; // inclusive
  tokens: string[];
}

export function chunkTokens(
  tokens: string[],
  maxTokens: number = DEFAULT_MAX_SOURCE_TOKENS,
  overlapTokens: number = DEFAULT_OVERLAP_TOKENS,
): TokenChunk[] {
  if (maxTokens <= overlapTokens || overlapTokens < 0) {
    throw new Error(`need maxTokens > overlapTokens >= 0, got ${maxTokens}/${overlapTokens}`);
  }
  const step = maxTokens - overlapTokens;
  const chunks: TokenChunk[] = [];
  let start = 0;
  while (start < tokens.length) {
    const end = Math.min(start + maxTokens, tokens.length);
    chunks.push({ index: chunks.length, first: start, last: end - 1, tokens: tokens.slice(start, end) });
    if (end >= tokens.length) break;
    start += step;
  }
  return chunks;
}
