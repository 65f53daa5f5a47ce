import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { runCli } from "../src/cli.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const FORGET = join(HERE, "fixtures", "forget.jsonl");
const NEIGHBOR = join(HERE, "fixtures", "neighbor.jsonl");

interface Report {
  mode: string;
  steps: number;
  param_count: number;
  forget_nll: { start: number; end: number };
  aux_nll: { start: number; end: number } | null;
  step_reports: { step: number; terms: Record<string, number>; total: number }[];
}

function run(args: string[]): Report {
  return runCli(args).report as unknown as Report;
}

describe("runCli", () => {
  it("trains GA on the fixture forget set and raises its NLL", () => {
    const report = run(["--forget", FORGET, "--mode", "GA", "--steps", "20", "--lr", "0.02"]);
    expect(report.mode).toBe("GA");
    expect(report.step_reports.length).toBe(20);
    expect(Object.keys(report.step_reports[0].terms)).toEqual(["ga"]);
    expect(report.forget_nll.end).toBeGreaterThan(report.forget_nll.start);
  });

  it("writes the report file with per-step loss terms", () => {
    const dir = mkdtempSync(join(tmpdir(), "trainer-cli-"));
    const reportPath = join(dir, "report.json");
    const { reportPath: written } = runCli([
      "--forget", FORGET,
      "--neighbor", NEIGHBOR,
      "--mode", "GA+GD",
      "--steps", "5",
      "--lr", "0.01",
      "--report", reportPath,
    ]);
    expect(written).toBe(reportPath);
    expect(existsSync(reportPath)).toBe(true);
    const report = JSON.parse(readFileSync(reportPath, "utf-8")) as Report;
    expect(report.step_reports.length).toBe(5);
    for (const step of report.step_reports) {
      expect(Object.keys(step.terms).sort()).toEqual(["ga", "gd"]);
      expect(Number.isFinite(step.total)).toBe(true);
    }
    expect(report.aux_nll).not.toBeNull();
  });

  it("starts NPO at ln 2 because the reference is the initial model", () => {
    const report = run(["--forget", FORGET, "--mode", "NPO", "--steps", "3", "--lr", "0.01"]);
    expect(Math.abs(report.step_reports[0].terms.npo - Math.log(2))).toBeLessThan(1e-12);
  });

  it("is deterministic for a fixed seed and differs across seeds", () => {
    const a = run(["--forget", FORGET, "--mode", "GA", "--steps", "4", "--seed", "5"]);
    const b = run(["--forget", FORGET, "--mode", "GA", "--steps", "4", "--seed", "5"]);
    const c = run(["--forget", FORGET, "--mode", "GA", "--steps", "4", "--seed", "6"]);
    expect(a.forget_nll).toEqual(b.forget_nll);
    expect(a.forget_nll.start).not.toBe(c.forget_nll.start);
  });

  it("rejects missing or inconsistent arguments", () => {
    expect(() => runCli(["--mode", "GA"])).toThrowError(/--forget is required/);
    expect(() => runCli(["--forget", FORGET, "--mode", "bogus"])).toThrowError(/--mode/);
    expect(() => runCli(["--forget", FORGET, "--mode", "GA+GD"])).toThrowError(/--neighbor/);
  });
});
