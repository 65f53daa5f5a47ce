/**
 * Single-process unlearning loop. Each step minimizes a weighted sum picked
 * by `mode`; because the forget terms carry an inverted sign, plain SGD on
 * the sum realizes gradient ascent on the forget set while the optional
 * retain-side term (descent on NLL or KL-to-reference) counteracts drift.
 */

import { ConfigError } from "./errors.js";
import type { UnlearnBatch } from "./data.js";
import type { CausalLM } from "./model.js";
import { gaLoss, gdLoss, klLoss, npoLoss, type LossResult } from "./losses.js";

export type Mode = "GA" | "NPO" | "GA+GD" | "GA+KL";

export interface LossConfig {
  beta: number; // NPO temperature
  unlearningRate: number; // SGD step size
  combineWeights: { forgetTerm: number; retainTerm: number };
}

export const DEFAULT_CONFIG: LossConfig = {
  beta: 1.0,
  unlearningRate: 0.1,
  combineWeights: { forgetTerm: 1.0, retainTerm: 1.0 },
};

export interface StepReport {
  step: number;
  terms: Record<string, number>;
  total: number;
}

export function validateConfig(config: LossConfig): void {
  if (!(config.beta > 0)) throw new ConfigError(`beta must be > 0, got ${config.beta}`);
  if (!(config.unlearningRate > 0)) {
    throw new ConfigError(`unlearningRate must be > 0, got ${config.unlearningRate}`);
  }
  if (!Number.isFinite(config.combineWeights.forgetTerm) || !Number.isFinite(config.combineWeights.retainTerm)) {
    throw new ConfigError("combineWeights must be finite");
  }
}

/**
 * One optimization step. `aux` feeds the retain-side term and is required
 * for the combined modes; GA and NPO ignore it entirely. Returns the loss
 * report for the pre-update parameters.
 */
export function combinedStep(
  model: CausalLM,
  ref: CausalLM,
  forget: UnlearnBatch,
  aux: UnlearnBatch | null,
  config: LossConfig,
  mode: Mode,
  step = 0,
): StepReport {
  validateConfig(config);
  const { forgetTerm, retainTerm } = config.combineWeights;
  const parts: { name: string; weight: number; result: LossResult }[] = [];

  switch (mode) {
    case "GA":
      parts.push({ name: "ga", weight: forgetTerm, result: gaLoss(model, forget) });
      break;
    case "NPO":
      parts.push({ name: "npo", weight: forgetTerm, result: npoLoss(model, ref, forget, config.beta) });
      break;
    case "GA+GD":
      if (!aux) throw new ConfigError("GA+GD needs an aux batch for the gd term");
      parts.push({ name: "ga", weight: forgetTerm, result: gaLoss(model, forget) });
      parts.push({ name: "gd", weight: retainTerm, result: gdLoss(model, aux) });
      break;
    case "GA+KL":
      if (!aux) throw new ConfigError("GA+KL needs an aux batch for the kl term");
      parts.push({ name: "ga", weight: forgetTerm, result: gaLoss(model, forget) });
      parts.push({ name: "kl", weight: retainTerm, result: klLoss(model, ref, aux) });
      break;
    default:
      throw new ConfigError(`unknown mode ${String(mode)}`);
  }

  const params = model.getParams();
  const terms: Record<string, number> = {};
  let total = 0;
  for (const part of parts) {
    terms[part.name] = part.result.value;
    total += part.weight * part.result.value;
    for (let i = 0; i < params.length; i++) {
      params[i] -= config.unlearningRate * part.weight * part.result.grad[i];
    }
  }
  model.setParams(params);
  return { step, terms, total };
}

export interface TrainResult {
  reports: StepReport[];
}

export function trainLoop(
  model: CausalLM,
  ref: CausalLM,
  forget: UnlearnBatch,
  aux: UnlearnBatch | null,
  config: LossConfig,
  mode: Mode,
  steps: number,
): TrainResult {
  if (!Number.isInteger(steps) || steps < 1) throw new ConfigError(`steps must be >= 1, got ${steps}`);
  const reports: StepReport[] = [];
  for (let step = 0; step < steps; step++) {
    reports.push(combinedStep(model, ref, forget, aux, config, mode, step));
  }
  return { reports };
}
