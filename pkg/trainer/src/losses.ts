/**
 * The four unlearning objectives, all of them means over masked tokens so
 * loss scale does not depend on answer length.
 *
 *   ga   -(masked mean NLL); descending it ascends the LM loss
 *   npo  -mean_s log sigmoid(beta * (log p_ref(ans_s) - log p(ans_s)))
 *   gd   masked mean NLL
 *   kl   mean over masked positions of KL(ref row || model row)
 *
 * Every loss returns both its value and the analytic gradient w.r.t. the
 * model's flat parameter vector. The gradients are exact; the test suite
 * verifies them against central finite differences.
 */

import { ConfigError, EmptyMask } from "./errors.js";
import type { UnlearnBatch } from "./data.js";
import type { CausalLM } from "./model.js";

export interface LossResult {
  value: number;
  grad: Float64Array;
}

function logSoftmax(row: number[]): number[] {
  let max = -Infinity;
  for (const z of row) if (z > max) max = z;
  let sum = 0;
  for (const z of row) sum += Math.exp(z - max);
  const logZ = max + Math.log(sum);
  return row.map((z) => z - logZ);
}

function softplus(x: number): number {
  // log(1 + e^x), stable for large |x|
  return Math.max(x, 0) + Math.log1p(Math.exp(-Math.abs(x)));
}

function sigmoid(x: number): number {
  return x >= 0 ? 1 / (1 + Math.exp(-x)) : Math.exp(x) / (1 + Math.exp(x));
}

function maskedCount(batch: UnlearnBatch): number {
  let total = 0;
  for (const seq of batch.sequences) for (const m of seq.mask) total += m;
  return total;
}

function zeroRows(count: number, width: number): number[][] {
  const rows: number[][] = [];
  for (let i = 0; i < count; i++) rows.push(new Array<number>(width).fill(0));
  return rows;
}

function addInto(acc: Float64Array, part: Float64Array): void {
  for (let i = 0; i < acc.length; i++) acc[i] += part[i];
}

/** Masked mean NLL plus its gradient: the standard LM objective. */
export function gdLoss(model: CausalLM, batch: UnlearnBatch): LossResult {
  const total = maskedCount(batch);
  if (total === 0) throw new EmptyMask();
  const V = model.vocabSize;
  const grad = new Float64Array(model.paramCount());
  let value = 0;
  for (const seq of batch.sequences) {
    const logits = model.logitsFor(seq.tokens);
    const dLogits = zeroRows(logits.length, V);
    let touched = false;
    for (let t = 1; t < seq.tokens.length; t++) {
      if (seq.mask[t] !== 1) continue;
      touched = true;
      const logProbs = logSoftmax(logits[t - 1]);
      const y = seq.tokens[t];
      value -= logProbs[y] / total;
      const row = dLogits[t - 1];
      for (let v = 0; v < V; v++) {
        row[v] += (Math.exp(logProbs[v]) - (v === y ? 1 : 0)) / total;
      }
    }
    if (touched) addInto(grad, model.gradFromLogits(seq.tokens, dLogits));
  }
  return { value, grad };
}

/** Sign-flipped gdLoss. One SGD step on it is one gradient-ascent step. */
export function gaLoss(model: CausalLM, batch: UnlearnBatch): LossResult {
  const { value, grad } = gdLoss(model, batch);
  for (let i = 0; i < grad.length; i++) grad[i] = -grad[i];
  return { value: -value, grad };
}

/**
 * Preference-style objective against a frozen reference: the masked answer
 * span is the rejected continuation. Per-sequence log ratios, averaged over
 * sequences.
 */
export function npoLoss(
  model: CausalLM,
  ref: CausalLM,
  batch: UnlearnBatch,
  beta: number,
): LossResult {
  if (!(beta > 0)) throw new ConfigError(`beta must be > 0, got ${beta}`);
  if (batch.sequences.length === 0 || maskedCount(batch) === 0) throw new EmptyMask();
  const V = model.vocabSize;
  const S = batch.sequences.length;
  const grad = new Float64Array(model.paramCount());
  let value = 0;
  for (const seq of batch.sequences) {
    const logits = model.logitsFor(seq.tokens);
    const refLogits = ref.logitsFor(seq.tokens);
    const logProbRows: (number[] | null)[] = logits.map(() => null);
    let logPModel = 0;
    let logPRef = 0;
    let masked = 0;
    for (let t = 1; t < seq.tokens.length; t++) {
      if (seq.mask[t] !== 1) continue;
      masked += 1;
      const y = seq.tokens[t];
      const lp = logSoftmax(logits[t - 1]);
      logProbRows[t - 1] = lp;
      logPModel += lp[y];
      logPRef += logSoftmax(refLogits[t - 1])[y];
    }
    if (masked === 0) throw new EmptyMask("sequence without masked tokens in NPO batch");
    const r = beta * (logPRef - logPModel);
    value += softplus(-r) / S; // -log sigmoid(r)
    const coeff = (beta * (1 - sigmoid(r))) / S;
    const dLogits = zeroRows(logits.length, V);
    for (let t = 1; t < seq.tokens.length; t++) {
      if (seq.mask[t] !== 1) continue;
      const y = seq.tokens[t];
      const lp = logProbRows[t - 1]!;
      const row = dLogits[t - 1];
      for (let v = 0; v < V; v++) {
        row[v] += coeff * ((v === y ? 1 : 0) - Math.exp(lp[v]));
      }
    }
    addInto(grad, model.gradFromLogits(seq.tokens, dLogits));
  }
  return { value, grad };
}

/**
 * Mean full-vocabulary KL(ref || model) over masked positions. Gradient
 * flows only into the trained model; the reference stays frozen.
 */
export function klLoss(model: CausalLM, ref: CausalLM, batch: UnlearnBatch): LossResult {
  const total = maskedCount(batch);
  if (total === 0) throw new EmptyMask();
  const V = model.vocabSize;
  const grad = new Float64Array(model.paramCount());
  let value = 0;
  for (const seq of batch.sequences) {
    const logits = model.logitsFor(seq.tokens);
    const refLogits = ref.logitsFor(seq.tokens);
    const dLogits = zeroRows(logits.length, V);
    let touched = false;
    for (let t = 1; t < seq.tokens.length; t++) {
      if (seq.mask[t] !== 1) continue;
      touched = true;
      const lp = logSoftmax(logits[t - 1]);
      const lpRef = logSoftmax(refLogits[t - 1]);
      const row = dLogits[t - 1];
      for (let v = 0; v < V; v++) {
        const pRef = Math.exp(lpRef[v]);
        value += (pRef * (lpRef[v] - lp[v])) / total;
        row[v] += (Math.exp(lp[v]) - pRef) / total;
      }
    }
    if (touched) addInto(grad, model.gradFromLogits(seq.tokens, dLogits));
  }
  return { value, grad };
}

/** Evaluation helper: masked mean NLL without the gradient bookkeeping. */
export function maskedNll(model: CausalLM, batch: UnlearnBatch): number {
  const total = maskedCount(batch);
  if (total === 0) throw new EmptyMask();
  let value = 0;
  for (const seq of batch.sequences) {
    const logits = model.logitsFor(seq.tokens);
    for (let t = 1; t < seq.tokens.length; t++) {
      if (seq.mask[t] !== 1) continue;
      value -= logSoftmax(logits[t - 1])[seq.tokens[t]] / total;
    }
  }
  return value;
}
