import type { CausalLM } from "../src/model.js";

/** Central finite differences of a scalar loss over the model parameters. */
export function fdGrad(
  model: CausalLM,
  lossValue: (model: CausalLM) => number,
  h = 1e-5,
): Float64Array {
  const base = model.getParams();
  const grad = new Float64Array(base.length);
  for (let i = 0; i < base.length; i++) {
    const bumped = base.slice();
    bumped[i] = base[i] + h;
    model.setParams(bumped);
    const plus = lossValue(model);
    bumped[i] = base[i] - h;
    model.setParams(bumped);
    const minus = lossValue(model);
    grad[i] = (plus - minus) / (2 * h);
  }
  model.setParams(base);
  return grad;
}

export function maxRelError(analytic: Float64Array, numeric: Float64Array): number {
  let worst = 0;
  for (let i = 0; i < analytic.length; i++) {
    const scale = Math.max(1, Math.abs(analytic[i]), Math.abs(numeric[i]));
    worst = Math.max(worst, Math.abs(analytic[i] - numeric[i]) / scale);
  }
  return worst;
}
