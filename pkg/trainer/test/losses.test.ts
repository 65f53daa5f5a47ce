import { describe, expect, it } from "vitest";

import { batchFromTokens } from "../src/data.js";
import { ConfigError, EmptyMask } from "../src/errors.js";
import { gaLoss, gdLoss, klLoss, maskedNll, npoLoss } from "../src/losses.js";
import { BigramLM, PositionTableLM, UnigramLM } from "../src/model.js";
import { mulberry32, randomParams } from "../src/rng.js";

const LN2 = Math.log(2);

function forgetBatch() {
  return batchFromTokens([
    { tokens: [0, 1, 2, 1], mask: [0, 1, 1, 0] },
    { tokens: [0, 2, 2], mask: [0, 0, 1] },
  ]);
}

describe("gd and ga", () => {
  it("uniform model gives ln V per masked token", () => {
    for (const V of [2, 3, 7]) {
      const model = new UnigramLM(V);
      const batch = batchFromTokens([{ tokens: [0, 1, V - 1], mask: [0, 1, 1] }]);
      expect(Math.abs(gdLoss(model, batch).value - Math.log(V))).toBeLessThan(1e-12);
      expect(Math.abs(gaLoss(model, batch).value + Math.log(V))).toBeLessThan(1e-12);
    }
  });

  it("a near-oracle model drives the loss toward zero", () => {
    // put almost all mass on the observed next token
    const model = new BigramLM(3);
    const params = new Float64Array(9);
    params[0 * 3 + 1] = 30; // after 0 predict 1
    params[1 * 3 + 2] = 30; // after 1 predict 2
    model.setParams(params);
    const batch = batchFromTokens([{ tokens: [0, 1, 2], mask: [0, 1, 1] }]);
    expect(gdLoss(model, batch).value).toBeLessThan(1e-10);
  });

  it("ga is exactly the negation of gd", () => {
    const model = new BigramLM(3, randomParams(9, 11, 1.0));
    const batch = forgetBatch();
    const gd = gdLoss(model, batch);
    const ga = gaLoss(model, batch);
    expect(ga.value).toBe(-gd.value);
    for (let i = 0; i < gd.grad.length; i++) {
      expect(ga.grad[i]).toBe(-gd.grad[i]);
    }
  });

  it("rejects an all-zero mask", () => {
    const model = new UnigramLM(3);
    const batch = batchFromTokens([{ tokens: [0, 1, 2], mask: [0, 0, 0] }]);
    expect(() => gdLoss(model, batch)).toThrowError(EmptyMask);
    expect(() => gaLoss(model, batch)).toThrowError(EmptyMask);
    expect(() => maskedNll(model, batch)).toThrowError(EmptyMask);
  });

  it("maskedNll agrees with the gd value", () => {
    const model = new BigramLM(3, randomParams(9, 5, 0.7));
    const batch = forgetBatch();
    expect(maskedNll(model, batch)).toBeCloseTo(gdLoss(model, batch).value, 15);
  });
});

describe("npo", () => {
  it("equals ln 2 exactly at theta = ref", () => {
    const model = new BigramLM(4, randomParams(16, 3, 0.8));
    const ref = model.clone();
    const { value, grad } = npoLoss(model, ref, forgetBatch(), 1.0);
    expect(Math.abs(value - LN2)).toBeLessThan(1e-15);
    // gradient is nonzero at theta = ref: the objective still pushes away
    expect(Math.max(...Array.from(grad, Math.abs))).toBeGreaterThan(0);
  });

  it("tends to zero as the model stops producing the answer", () => {
    const ref = new UnigramLM(3);
    const params = new Float64Array([0, -60, 0]);
    const model = new UnigramLM(3, params);
    const batch = batchFromTokens([{ tokens: [0, 1], mask: [0, 1] }]);
    expect(npoLoss(model, ref, batch, 1.0).value).toBeLessThan(1e-12);
  });

  it("stays positive and finite on random models", () => {
    const next = mulberry32(99);
    for (let trial = 0; trial < 50; trial++) {
      const model = new BigramLM(4, randomParams(16, 1000 + trial, next() * 2));
      const ref = new BigramLM(4, randomParams(16, 2000 + trial, next() * 2));
      const value = npoLoss(model, ref, forgetBatch(), 0.5 + next()).value;
      expect(value).toBeGreaterThan(0);
      expect(Number.isFinite(value)).toBe(true);
    }
  });

  it("validates beta and the mask", () => {
    const model = new UnigramLM(2);
    const batch = batchFromTokens([{ tokens: [0, 1], mask: [0, 1] }]);
    expect(() => npoLoss(model, model.clone(), batch, 0)).toThrowError(ConfigError);
    expect(() => npoLoss(model, model.clone(), batch, -1)).toThrowError(ConfigError);
    const unmasked = batchFromTokens([{ tokens: [0, 1], mask: [0, 0] }]);
    expect(() => npoLoss(model, model.clone(), unmasked, 1.0)).toThrowError(EmptyMask);
  });
});

describe("kl", () => {
  it("is exactly zero at theta = ref", () => {
    const model = new BigramLM(5, randomParams(25, 7, 0.9));
    const { value } = klLoss(model, model.clone(), forgetBatch());
    expect(value).toBe(0);
  });

  it("is nonnegative across 100 random initializations", () => {
    for (let seed = 0; seed < 100; seed++) {
      const model = new UnigramLM(4, randomParams(4, seed, 2.0));
      const ref = new UnigramLM(4, randomParams(4, seed + 7777, 2.0));
      expect(klLoss(model, ref, forgetBatch()).value).toBeGreaterThanOrEqual(0);
    }
  });

  it("matches direct summation over a 3-token vocabulary", () => {
    // independent oracle: softmax and sum p*log(p/q) computed from scratch
    const softmax = (z: number[]) => {
      const e = z.map(Math.exp);
      const s = e.reduce((a, b) => a + b, 0);
      return e.map((x) => x / s);
    };
    for (let seed = 0; seed < 50; seed++) {
      const model = new UnigramLM(3, randomParams(3, seed, 1.5));
      const ref = new UnigramLM(3, randomParams(3, seed + 31, 1.5));
      const batch = batchFromTokens([{ tokens: [0, 1, 2], mask: [0, 1, 1] }]);
      const p = softmax(Array.from(ref.getParams()));
      const q = softmax(Array.from(model.getParams()));
      const expected = p.reduce((acc, pv, v) => acc + pv * Math.log(pv / q[v]), 0);
      expect(Math.abs(klLoss(model, ref, batch).value - expected)).toBeLessThan(1e-12);
    }
  });

  it("rejects an all-zero mask", () => {
    const model = new UnigramLM(3);
    const batch = batchFromTokens([{ tokens: [0, 1, 2], mask: [0, 0, 0] }]);
    expect(() => klLoss(model, model.clone(), batch)).toThrowError(EmptyMask);
  });
});

describe("mask locality", () => {
  it("perturbing logits at unmasked positions leaves every loss bit-identical", () => {
    const V = 5;
    const tokens = [0, 2, 3, 1, 4];
    const mask = [0, 0, 1, 1, 0]; // predictions at positions 2 and 3 are in the span
    const batch = batchFromTokens([{ tokens, mask }]);
    const base = randomParams(4 * V, 42, 1.0);
    const model = new PositionTableLM(V, 4, base);
    const ref = new PositionTableLM(V, 4, randomParams(4 * V, 43, 1.0));

    const before = {
      gd: gdLoss(model, batch).value,
      ga: gaLoss(model, batch).value,
      npo: npoLoss(model, ref, batch, 0.7).value,
      kl: klLoss(model, ref, batch).value,
    };

    // positions 1 and 4 are outside the answer span; scribble over them
    const next = mulberry32(7);
    const perturbed = base.slice();
    for (let v = 0; v < V; v++) {
      perturbed[model.paramIndex(1, v)] += next() * 10 - 5;
      perturbed[model.paramIndex(4, v)] += next() * 10 - 5;
    }
    model.setParams(perturbed);

    expect(gdLoss(model, batch).value).toBe(before.gd);
    expect(gaLoss(model, batch).value).toBe(before.ga);
    expect(npoLoss(model, ref, batch, 0.7).value).toBe(before.npo);
    expect(klLoss(model, ref, batch).value).toBe(before.kl);

    // a masked position does move the losses
    perturbed[model.paramIndex(2, 0)] += 1.0;
    model.setParams(perturbed);
    expect(gdLoss(model, batch).value).not.toBe(before.gd);
  });
});
