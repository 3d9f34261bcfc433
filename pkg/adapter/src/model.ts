/**
 * A small randomly initialized classifier used to exercise the export
 * pipeline: hashed subword embeddings through a seeded linear head.
 * Fully deterministic for a given (dim, seed).
 */

export interface ModelSpec {
  type: "random";
  dim: number;
  seed: number;
}

/** mulberry32: tiny deterministic PRNG over uint32 state. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function fnv1a32(text: string): number {
  let h = 0x811c9dc5;
  for (const byte of Buffer.from(text, "utf-8")) {
    h ^= byte;
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

function logSoftmax(logits: number[]): number[] {
  const max = Math.max(...logits);
  const logZ = max + Math.log(logits.reduce((acc, v) => acc + Math.exp(v - max), 0));
  return logits.map((v) => v - logZ);
}

function softmax(logits: number[]): number[] {
  const shifted = logSoftmax(logits);
  return shifted.map(Math.exp);
}

export class RandomClassifier {
  readonly dim: number;
  readonly seed: number;
  private readonly weights: number[][]; // [output][dim]
  private readonly bias: number[];

  constructor(spec: ModelSpec, nOutputs: number) {
    if (spec.type !== "random") {
      throw new Error(`unsupported model type ${spec.type}`);
    }
    if (spec.dim < 1 || !Number.isInteger(spec.dim)) {
      throw new Error(`model dim must be a positive integer, got ${spec.dim}`);
    }
    this.dim = spec.dim;
    this.seed = spec.seed;
    const rng = mulberry32(spec.seed);
    this.weights = [];
    for (let k = 0; k < nOutputs; k += 1) {
      const row: number[] = [];
      for (let d = 0; d < spec.dim; d += 1) {
        row.push((rng() - 0.5) * 2);
      }
      this.weights.push(row);
    }
    this.bias = this.weights.map(() => (rng() - 0.5) * 0.5);
  }

  /** Hash-derived embedding in [-1, 1]^dim, salted by the model seed. */
  embed(piece: string): number[] {
    const base = fnv1a32(piece) ^ (this.seed >>> 0);
    const rng = mulberry32(base >>> 0);
    const vec: number[] = [];
    for (let d = 0; d < this.dim; d += 1) {
      vec.push((rng() - 0.5) * 2);
    }
    return vec;
  }

  private logits(vec: number[]): number[] {
    return this.weights.map((row, k) => {
      let total = this.bias[k];
      for (let d = 0; d < this.dim; d += 1) {
        total += row[d] * vec[d];
      }
      return total;
    });
  }

  /** Per-output log-probabilities for one subword piece. */
  logScores(piece: string): number[] {
    return logSoftmax(this.logits(this.embed(piece)));
  }

  /** Output distribution for a bag of pieces (mean-pooled embedding). */
  probs(pieces: string[]): number[] {
    const pooled = new Array(this.dim).fill(0);
    for (const piece of pieces) {
      const vec = this.embed(piece);
      for (let d = 0; d < this.dim; d += 1) {
        pooled[d] += vec[d];
      }
    }
    if (pieces.length > 0) {
      for (let d = 0; d < this.dim; d += 1) {
        pooled[d] /= pieces.length;
      }
    }
    return softmax(this.logits(pooled));
  }
}
