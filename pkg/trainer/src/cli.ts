#!/usr/bin/env node
/**
 * Train the toy reference model on mined supervision files and write a JSON
 * report with per-step loss terms.
 *
 *   memscrub-train --forget out/forget.jsonl --neighbor out/neighbor.jsonl \
 *     --mode GA+GD --steps 50 --lr 0.05 --report report.json
 */

import { parseArgs } from "node:util";
import { writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { buildBatch, loadSamples, vocabOver } from "./data.js";
import { BigramLM } from "./model.js";
import { maskedNll } from "./losses.js";
import { randomParams } from "./rng.js";
import { DEFAULT_CONFIG, trainLoop, type LossConfig, type Mode } from "./train.js";

const MODES: Mode[] = ["GA", "NPO", "GA+GD", "GA+KL"];

export interface CliResult {
  report: Record<string, unknown>;
  reportPath: string | null;
}

export function runCli(argv: string[]): CliResult {
  const { values } = parseArgs({
    args: argv,
    options: {
      forget: { type: "string" },
      neighbor: { type: "string" },
      mode: { type: "string", default: "GA" },
      steps: { type: "string", default: "50" },
      lr: { type: "string", default: String(DEFAULT_CONFIG.unlearningRate) },
      beta: { type: "string", default: String(DEFAULT_CONFIG.beta) },
      "forget-weight": { type: "string", default: "1" },
      "retain-weight": { type: "string", default: "1" },
      seed: { type: "string", default: "0" },
      report: { type: "string" },
    },
  });

  if (!values.forget) throw new Error("--forget is required");
  const mode = values.mode as Mode;
  if (!MODES.includes(mode)) throw new Error(`--mode must be one of ${MODES.join(", ")}`);
  const combined = mode === "GA+GD" || mode === "GA+KL";
  if (combined && !values.neighbor) throw new Error(`--neighbor is required for ${mode}`);

  const forgetSamples = loadSamples(values.forget);
  const neighborSamples = values.neighbor ? loadSamples(values.neighbor) : [];
  const vocab = vocabOver(forgetSamples, neighborSamples);
  const forget = buildBatch(forgetSamples, vocab, "forget");
  const aux = neighborSamples.length ? buildBatch(neighborSamples, vocab, "neighbor") : null;

  const config: LossConfig = {
    beta: Number(values.beta),
    unlearningRate: Number(values.lr),
    combineWeights: {
      forgetTerm: Number(values["forget-weight"]),
      retainTerm: Number(values["retain-weight"]),
    },
  };
  const steps = Number(values.steps);
  const seed = Number(values.seed);

  const model = new BigramLM(vocab.size, randomParams(vocab.size * vocab.size, seed));
  const ref = model.clone();
  const startForgetNll = maskedNll(model, forget);
  const startAuxNll = aux ? maskedNll(model, aux) : null;

  const { reports } = trainLoop(model, ref, forget, combined ? aux : null, config, mode, steps);

  const report: Record<string, unknown> = {
    mode,
    steps,
    seed,
    vocab_size: vocab.size,
    param_count: model.paramCount(),
    config: {
      beta: config.beta,
      unlearning_rate: config.unlearningRate,
      combine_weights: config.combineWeights,
    },
    forget_samples: forgetSamples.length,
    forget_sequences: forget.sequences.length,
    neighbor_sequences: aux ? aux.sequences.length : 0,
    forget_nll: { start: startForgetNll, end: maskedNll(model, forget) },
    aux_nll: aux ? { start: startAuxNll, end: maskedNll(model, aux) } : null,
    step_reports: reports.map((r) => ({ step: r.step, terms: r.terms, total: r.total })),
  };

  let reportPath: string | null = null;
  if (values.report) {
    writeFileSync(values.report, JSON.stringify(report, null, 2) + "\n", "utf-8");
    reportPath = values.report;
  }
  return { report, reportPath };
}

const isMain = process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;
if (isMain) {
  try {
    const { report, reportPath } = runCli(process.argv.slice(2));
    const nll = report.forget_nll as { start: number; end: number };
    console.log(`mode=${report.mode} steps=${report.steps} params=${report.param_count}`);
    console.log(`forget nll ${nll.start.toFixed(4)} -> ${nll.end.toFixed(4)}`);
    if (reportPath) console.log(`report written to ${reportPath}`);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    process.exitCode = 1;
  }
}
