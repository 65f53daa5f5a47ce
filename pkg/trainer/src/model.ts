/**
 * Toy causal language models with hand-written gradients.
 *
 * The contract every loss builds on: `logitsFor(tokens)` returns one logit
 * row per predicted position (position t is predicted from tokens[0..t-1],
 * so a length-T sequence yields T-1 rows), and `gradFromLogits` pushes an
 * upstream gradient on those rows back onto the flat parameter vector.
 * That split keeps each loss responsible only for its own dLoss/dlogits.
 */

export interface CausalLM {
  readonly vocabSize: number;
  paramCount(): number;
  getParams(): Float64Array;
  setParams(params: Float64Array): void;
  clone(): CausalLM;
  logitsFor(tokens: number[]): number[][];
  /** dLoss/dparams given dLoss/dlogits rows aligned with logitsFor output. */
  gradFromLogits(tokens: number[], dLogits: number[][]): Float64Array;
}

function checkParams(params: Float64Array, expected: number): void {
  if (params.length !== expected) {
    throw new RangeError(`expected ${expected} parameters, got ${params.length}`);
  }
}

/**
 * Context-free model: one shared logit row regardless of position. The
 * smallest instance (vocabSize 2) is the two-parameter model used for
 * gradient checks.
 */
export class UnigramLM implements CausalLM {
  readonly vocabSize: number;
  private z: Float64Array;

  constructor(vocabSize: number, params?: Float64Array) {
    if (vocabSize < 2) throw new RangeError("vocabSize must be >= 2");
    this.vocabSize = vocabSize;
    this.z = new Float64Array(vocabSize);
    if (params) {
      checkParams(params, vocabSize);
      this.z.set(params);
    }
  }

  paramCount(): number {
    return this.vocabSize;
  }

  getParams(): Float64Array {
    return this.z.slice();
  }

  setParams(params: Float64Array): void {
    checkParams(params, this.vocabSize);
    this.z.set(params);
  }

  clone(): UnigramLM {
    return new UnigramLM(this.vocabSize, this.z);
  }

  logitsFor(tokens: number[]): number[][] {
    const rows: number[][] = [];
    for (let t = 1; t < tokens.length; t++) rows.push(Array.from(this.z));
    return rows;
  }

  gradFromLogits(tokens: number[], dLogits: number[][]): Float64Array {
    const grad = new Float64Array(this.vocabSize);
    for (const row of dLogits) {
      for (let v = 0; v < this.vocabSize; v++) grad[v] += row[v];
    }
    return grad;
  }
}

/**
 * Bigram model: logits for position t are the table row of tokens[t-1].
 * Parameters are the row-major V x V table; vocabSize 10 gives the
 * 100-parameter configuration the training-dynamics tests use.
 */
export class BigramLM implements CausalLM {
  readonly vocabSize: number;
  private table: Float64Array;

  constructor(vocabSize: number, params?: Float64Array) {
    if (vocabSize < 2) throw new RangeError("vocabSize must be >= 2");
    this.vocabSize = vocabSize;
    this.table = new Float64Array(vocabSize * vocabSize);
    if (params) {
      checkParams(params, vocabSize * vocabSize);
      this.table.set(params);
    }
  }

  paramCount(): number {
    return this.vocabSize * this.vocabSize;
  }

  getParams(): Float64Array {
    return this.table.slice();
  }

  setParams(params: Float64Array): void {
    checkParams(params, this.vocabSize * this.vocabSize);
    this.table.set(params);
  }

  clone(): BigramLM {
    return new BigramLM(this.vocabSize, this.table);
  }

  private row(context: number): number[] {
    if (context < 0 || context >= this.vocabSize) {
      throw new RangeError(`token id ${context} outside vocab of ${this.vocabSize}`);
    }
    const base = context * this.vocabSize;
    const out = new Array<number>(this.vocabSize);
    for (let v = 0; v < this.vocabSize; v++) out[v] = this.table[base + v];
    return out;
  }

  logitsFor(tokens: number[]): number[][] {
    const rows: number[][] = [];
    for (let t = 1; t < tokens.length; t++) rows.push(this.row(tokens[t - 1]));
    return rows;
  }

  gradFromLogits(tokens: number[], dLogits: number[][]): Float64Array {
    const grad = new Float64Array(this.table.length);
    for (let t = 1; t < tokens.length; t++) {
      const base = tokens[t - 1] * this.vocabSize;
      const row = dLogits[t - 1];
      for (let v = 0; v < this.vocabSize; v++) grad[base + v] += row[v];
    }
    return grad;
  }
}

/**
 * Free logits per position, for a fixed maximum length. Perturbing the
 * parameters of one position provably cannot touch any other position,
 * which is what the mask-locality tests exercise.
 */
export class PositionTableLM implements CausalLM {
  readonly vocabSize: number;
  readonly maxPositions: number;
  private table: Float64Array; // [position][vocab]

  constructor(vocabSize: number, maxPositions: number, params?: Float64Array) {
    if (vocabSize < 2) throw new RangeError("vocabSize must be >= 2");
    if (maxPositions < 1) throw new RangeError("maxPositions must be >= 1");
    this.vocabSize = vocabSize;
    this.maxPositions = maxPositions;
    this.table = new Float64Array(maxPositions * vocabSize);
    if (params) {
      checkParams(params, maxPositions * vocabSize);
      this.table.set(params);
    }
  }

  paramCount(): number {
    return this.maxPositions * this.vocabSize;
  }

  getParams(): Float64Array {
    return this.table.slice();
  }

  setParams(params: Float64Array): void {
    checkParams(params, this.table.length);
    this.table.set(params);
  }

  clone(): PositionTableLM {
    return new PositionTableLM(this.vocabSize, this.maxPositions, this.table);
  }

  /** Flat parameter index for (predicted position, vocab id). */
  paramIndex(position: number, vocabId: number): number {
    if (position < 1 || position > this.maxPositions) {
      throw new RangeError(`position ${position} outside 1..${this.maxPositions}`);
    }
    return (position - 1) * this.vocabSize + vocabId;
  }

  logitsFor(tokens: number[]): number[][] {
    if (tokens.length - 1 > this.maxPositions) {
      throw new RangeError(`sequence needs ${tokens.length - 1} positions, have ${this.maxPositions}`);
    }
    const rows: number[][] = [];
    for (let t = 1; t < tokens.length; t++) {
      const base = (t - 1) * this.vocabSize;
      const row = new Array<number>(this.vocabSize);
      for (let v = 0; v < this.vocabSize; v++) row[v] = this.table[base + v];
      rows.push(row);
    }
    return rows;
  }

  gradFromLogits(tokens: number[], dLogits: number[][]): Float64Array {
    const grad = new Float64Array(this.table.length);
    for (let t = 1; t < tokens.length; t++) {
      const base = (t - 1) * this.vocabSize;
      const row = dLogits[t - 1];
      for (let v = 0; v < this.vocabSize; v++) grad[base + v] += row[v];
    }
    return grad;
  }
}
