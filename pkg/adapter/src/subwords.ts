/**
 * Deterministic subword segmentation: words split into chunks of at most
 * four code points; continuation chunks carry the "##" marker, mirroring
 * wordpiece-style vocabularies.  Single-character punctuation tokens stay
 * whole.
 */

import { codePoints } from "./tokenizer.js";

export const CHUNK = 4;
export const CONTINUATION = "##";

export function splitWord(token: string): string[] {
  const cps = codePoints(token);
  if (cps.length <= CHUNK) {
    return [token];
  }
  const pieces: string[] = [];
  for (let i = 0; i < cps.length; i += CHUNK) {
    const body = cps.slice(i, i + CHUNK).join("");
    pieces.push(i === 0 ? body : CONTINUATION + body);
  }
  return pieces;
}

/** Strip continuation markers and re-join; must reproduce the token. */
export function reassemble(pieces: string[]): string {
  return pieces
    .map((p, i) => (i === 0 ? p : p.startsWith(CONTINUATION) ? p.slice(CONTINUATION.length) : p))
    .join("");
}
