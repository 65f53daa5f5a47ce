/**
 * Loader for the mining pipeline's supervision files.
 *
 * Each JSONL line is one QA sample. The canonical training string is
 * "Question: {question} Answer: {answer}" and `answer_span` is the character
 * range of the answer inside that string, which becomes the token-level loss
 * mask here. `multiplicity` counts collapsed duplicates and expands back
 * into sample repetition, so pair sampling frequency acts as supervision
 * weight.
 */

import { readFileSync } from "node:fs";

import { DatasetError, EmptyMask } from "./errors.js";
import { Vocab, encode, maskFromSpan } from "./tokenizer.js";

export type Split = "forget" | "neighbor" | "retain";

export interface QaSample {
  kind: "forget" | "neighbor";
  question: string;
  answer: string;
  target: string;
  obj: string;
  event: string;
  sourcePath: string[];
  answerSpan: [number, number];
  multiplicity: number;
}

export interface MaskedSequence {
  tokens: number[]; // BOS-prefixed token ids
  mask: number[]; // 1 on answer-span tokens only
  text: string;
}

export interface UnlearnBatch {
  split: Split;
  sequences: MaskedSequence[]; // multiplicity already expanded
}

export function canonicalText(sample: QaSample): string {
  return `Question: ${sample.question} Answer: ${sample.answer}`;
}

function asString(doc: Record<string, unknown>, key: string, where: string): string {
  const value = doc[key];
  if (typeof value !== "string") throw new DatasetError(`${where}: field ${key} must be a string`);
  return value;
}

export function loadSamples(path: string): QaSample[] {
  let raw: string;
  try {
    raw = readFileSync(path, "utf-8");
  } catch (err) {
    throw new DatasetError(`cannot read ${path}: ${(err as Error).message}`);
  }
  const samples: QaSample[] = [];
  const lines = raw.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    const where = `${path}:${i + 1}`;
    let doc: Record<string, unknown>;
    try {
      doc = JSON.parse(line) as Record<string, unknown>;
    } catch (err) {
      throw new DatasetError(`${where}: bad JSON: ${(err as Error).message}`);
    }
    const kind = asString(doc, "kind", where);
    if (kind !== "forget" && kind !== "neighbor") {
      throw new DatasetError(`${where}: unknown kind ${kind}`);
    }
    const span = doc["answer_span"];
    if (!Array.isArray(span) || span.length !== 2 || !span.every((v) => Number.isInteger(v))) {
      throw new DatasetError(`${where}: answer_span must be a pair of integers`);
    }
    const multiplicity = doc["multiplicity"];
    if (!Number.isInteger(multiplicity) || (multiplicity as number) < 1) {
      throw new DatasetError(`${where}: multiplicity must be a positive integer`);
    }
    const sourcePath = doc["source_path"];
    if (!Array.isArray(sourcePath) || !sourcePath.every((v) => typeof v === "string")) {
      throw new DatasetError(`${where}: source_path must be a list of strings`);
    }
    samples.push({
      kind,
      question: asString(doc, "question", where),
      answer: asString(doc, "answer", where),
      target: asString(doc, "target", where),
      obj: asString(doc, "obj", where),
      event: asString(doc, "event", where),
      sourcePath: sourcePath as string[],
      answerSpan: [span[0] as number, span[1] as number],
      multiplicity: multiplicity as number,
    });
  }
  return samples;
}

/**
 * Tokenize samples against `vocab` and expand multiplicity into repetition.
 * Throws EmptyMask if any sample's answer span covers no token: a sample
 * that cannot contribute loss indicates broken data, not skippable noise.
 */
export function buildBatch(samples: QaSample[], vocab: Vocab, split: Split): UnlearnBatch {
  const sequences: MaskedSequence[] = [];
  for (const sample of samples) {
    const text = canonicalText(sample);
    const encoded = encode(text, vocab);
    const mask = maskFromSpan(encoded, sample.answerSpan[0], sample.answerSpan[1]);
    if (!mask.some((m) => m === 1)) {
      throw new EmptyMask(`sample with answer ${JSON.stringify(sample.answer)} masks no tokens`);
    }
    const seq: MaskedSequence = { tokens: encoded.tokens, mask, text };
    for (let r = 0; r < sample.multiplicity; r++) sequences.push(seq);
  }
  return { split, sequences };
}

/** Vocabulary over every canonical string in the given sample lists. */
export function vocabOver(...sampleLists: QaSample[][]): Vocab {
  const texts: string[] = [];
  for (const list of sampleLists) for (const sample of list) texts.push(canonicalText(sample));
  return Vocab.fromTexts(texts);
}

/** Hand-rolled batch for tests and toy runs: raw token rows plus masks. */
export function batchFromTokens(
  rows: { tokens: number[]; mask: number[] }[],
  split: Split = "forget",
): UnlearnBatch {
  for (const row of rows) {
    if (row.tokens.length !== row.mask.length) {
      throw new DatasetError("tokens and mask must have equal length");
    }
    if (row.mask[0] !== 0) {
      throw new DatasetError("first position has no context and cannot be masked");
    }
  }
  return {
    split,
    sequences: rows.map((row) => ({ tokens: [...row.tokens], mask: [...row.mask], text: "" })),
  };
}
