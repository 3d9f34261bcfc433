/**
 * Word tokenizer matching the consumer toolkit's rule exactly: maximal runs
 * of letters/digits form tokens, every other non-whitespace character is a
 * single-character token.
 *
 * All offsets are Unicode code-point indices (not UTF-16 units), because
 * the downstream files use scalar-value offsets.
 */

export interface TokenSpan {
  text: string;
  start: number;
  end: number;
}

const ALNUM = /^[\p{L}\p{N}]$/u;
const SPACE = /^\s$/u;

export function isAlnum(ch: string): boolean {
  return ALNUM.test(ch);
}

/** Split text into code points once; offsets index into this array. */
export function codePoints(text: string): string[] {
  return Array.from(text);
}

export function tokenize(text: string): TokenSpan[] {
  const cps = codePoints(text);
  const tokens: TokenSpan[] = [];
  let i = 0;
  while (i < cps.length) {
    const ch = cps[i];
    if (SPACE.test(ch)) {
      i += 1;
      continue;
    }
    let j = i + 1;
    if (ALNUM.test(ch)) {
      while (j < cps.length && ALNUM.test(cps[j])) {
        j += 1;
      }
    }
    tokens.push({ text: cps.slice(i, j).join(""), start: i, end: j });
    i = j;
  }
  return tokens;
}
