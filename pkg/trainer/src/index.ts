export { ConfigError, DatasetError, EmptyMask } from "./errors.js";
export { mulberry32, randomParams } from "./rng.js";
export {
  BOS,
  UNK,
  Vocab,
  encode,
  maskFromSpan,
  tokenizePieces,
  type EncodedText,
  type TokenPiece,
} from "./tokenizer.js";
export {
  batchFromTokens,
  buildBatch,
  canonicalText,
  loadSamples,
  vocabOver,
  type MaskedSequence,
  type QaSample,
  type Split,
  type UnlearnBatch,
} from "./data.js";
export { BigramLM, PositionTableLM, UnigramLM, type CausalLM } from "./model.js";
export { gaLoss, gdLoss, klLoss, maskedNll, npoLoss, type LossResult } from "./losses.js";
export {
  DEFAULT_CONFIG,
  combinedStep,
  trainLoop,
  validateConfig,
  type LossConfig,
  type Mode,
  type StepReport,
  type TrainResult,
} from "./train.js";
export { runCli, type CliResult } from "./cli.js";
