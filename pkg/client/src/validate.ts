/**
 * Independent re-checks of archive integrity and physics invariants.
 *
 * Check codes are namespaced "format/..." and "physics/..." to match the
 * generator's validator, so pass/fail verdicts are directly comparable.
 */

import { basename } from "node:path";

import { DatasetArchive } from "./archive.js";
import { ContainerError } from "./errors.js";
import type { LoadedExample, LoadedField } from "./container.js";
import { expectedShapes, geometryFromMeta } from "./shapes.js";

export const EXPECTATION_TOL = 1e-9;
export const UNITARITY_TOL = 1e-8;
export const HERMITICITY_TOL = 1e-9;
export const IDENTITY_TOL = 1e-9;

export interface CheckResult {
  code: string;
  passed: boolean;
  detail: string;
}

export interface ValidationReport {
  path: string;
  name: string;
  passed: boolean;
  checks: CheckResult[];
}

class Report implements ValidationReport {
  name = "";
  checks: CheckResult[] = [];

  constructor(readonly path: string) {}

  get passed(): boolean {
    return this.checks.every((c) => c.passed);
  }

  add(code: string, passed: boolean, detail = ""): void {
    this.checks.push({ code, passed, detail });
  }

  freeze(): ValidationReport {
    return {
      path: this.path,
      name: this.name,
      passed: this.passed,
      checks: this.checks,
    };
  }
}

/** Frobenius defect ||U^dagger U - I||_F of one d x d complex matrix. */
function unitarityDefect(data: Float64Array, off: number, d: number): number {
  let sum = 0;
  for (let i = 0; i < d; i++) {
    for (let j = 0; j < d; j++) {
      let re = 0;
      let im = 0;
      for (let k = 0; k < d; k++) {
        const a = off + 2 * (k * d + i);
        const b = off + 2 * (k * d + j);
        const ar = data[a];
        const ai = -data[a + 1];
        const br = data[b];
        const bi = data[b + 1];
        re += ar * br - ai * bi;
        im += ar * bi + ai * br;
      }
      if (i === j) re -= 1;
      sum += re * re + im * im;
    }
  }
  return Math.sqrt(sum);
}

function hermiticityDefect(data: Float64Array, off: number, d: number): number {
  let sum = 0;
  for (let i = 0; i < d; i++) {
    for (let j = 0; j < d; j++) {
      const a = off + 2 * (i * d + j);
      const b = off + 2 * (j * d + i);
      const re = data[a] - data[b];
      const im = data[a + 1] + data[b + 1];
      sum += re * re + im * im;
    }
  }
  return Math.sqrt(sum);
}

function identityDefect(data: Float64Array, off: number, d: number): number {
  let sum = 0;
  for (let i = 0; i < d; i++) {
    for (let j = 0; j < d; j++) {
      const idx = off + 2 * (i * d + j);
      const re = data[idx] - (i === j ? 1 : 0);
      const im = data[idx + 1];
      sum += re * re + im * im;
    }
  }
  return Math.sqrt(sum);
}

function maxAbs(data: Float64Array): number {
  let worst = 0;
  for (const v of data) {
    const a = Math.abs(v);
    if (!(a <= worst)) worst = a; // NaN propagates to the caller via ! form
    if (Number.isNaN(v)) return Number.NaN;
  }
  return worst;
}

function eachMatrixDefect(
  field: LoadedField,
  defect: (data: Float64Array, off: number, d: number) => number
): number {
  const d = field.shape[field.shape.length - 1];
  const per = 2 * d * d;
  let worst = 0;
  for (let off = 0; off < field.data.length; off += per) {
    const v = defect(field.data, off, d);
    if (!(v <= worst)) worst = v;
    if (Number.isNaN(v)) return Number.NaN;
  }
  return worst;
}

function need(ex: LoadedExample, key: string): LoadedField {
  const field = ex.fields.get(key);
  if (!field) throw new Error(`example lacks field ${key}`);
  return field;
}

/** Report-only re-checks of one loaded example. */
export function validateExample(ex: LoadedExample): CheckResult[] {
  const checks: CheckResult[] = [];
  const push = (code: string, passed: boolean, detail: string) =>
    checks.push({ code, passed, detail });

  let geometry;
  try {
    geometry = geometryFromMeta(ex.meta);
  } catch (err) {
    push("format/shapes", false, String(err));
    return checks;
  }
  const declared = expectedShapes(geometry);
  const bad: string[] = [];
  for (const [key, want] of Object.entries(declared)) {
    const field = ex.fields.get(key);
    if (!field) {
      bad.push(`${key}: missing`);
      continue;
    }
    const sameShape =
      field.shape.length === want.shape.length &&
      field.shape.every((s, i) => s === want.shape[i]);
    if (!sameShape || field.dtype !== want.dtype) {
      bad.push(`${key}: ${field.dtype}[${field.shape}] != ${want.dtype}[${want.shape}]`);
    }
  }
  push("format/shapes", bad.length === 0, bad.join("; "));
  if (bad.length > 0) return checks;

  let worstE = 0;
  for (const key of ["expectations", "E_O", "V_O"] as const) {
    const w = maxAbs(need(ex, key).data);
    if (!(w <= worstE)) worstE = w;
  }
  push(
    "physics/expectation-bounds",
    worstE <= 1 + EXPECTATION_TOL,
    `max |E| = ${worstE}`
  );

  let worstU = 0;
  for (const key of ["U0", "U_I"] as const) {
    const v = eachMatrixDefect(need(ex, key), unitarityDefect);
    if (!(v <= worstU)) worstU = v;
  }
  push("physics/unitarity", worstU < UNITARITY_TOL, `max defect ${worstU}`);

  let worstH = 0;
  for (const key of ["H0", "H1"] as const) {
    const v = eachMatrixDefect(need(ex, key), hermiticityDefect);
    if (!(v <= worstH)) worstH = v;
  }
  push("physics/hermiticity", worstH < HERMITICITY_TOL, `max defect ${worstH}`);

  const noiseless =
    geometry.profiles.length === 0 || geometry.profiles.every((p) => p === "N0");
  if (noiseless) {
    const v = eachMatrixDefect(need(ex, "V_O_operator"), identityDefect);
    push("physics/noiseless-identity", v < IDENTITY_TOL, `max ||V_O - I|| = ${v}`);
  }
  if (!geometry.distortion) {
    const same = need(ex, "pulses").raw.equals(need(ex, "distorted_pulses").raw);
    push("physics/distortion-passthrough", same, `bytes equal: ${same}`);
  }
  return checks;
}

/** Full-archive validation; never throws on bad content. */
export async function validateArchive(path: string): Promise<ValidationReport> {
  const report = new Report(path);
  let archive: DatasetArchive;
  try {
    archive = await DatasetArchive.open(path);
  } catch (err) {
    report.add("format/archive", false, `unreadable archive: ${err}`);
    return report.freeze();
  }
  report.add("format/archive", true, "manifest.json parsed");
  report.name = String(archive.manifest.name ?? "");
  const stem = basename(path).replace(/\.zip$/, "");
  report.add(
    "format/name",
    stem === report.name,
    `archive stem ${stem}, manifest name ${report.name}`
  );

  const indices = archive.exampleIndices();
  const complete =
    indices.length === archive.numExamples && indices.every((v, i) => v === i);
  report.add(
    "format/entries",
    complete,
    `${indices.length} entries, expected ${archive.numExamples}`
  );
  if (!complete) return report.freeze();

  for (const index of indices) {
    let example: LoadedExample;
    try {
      example = await archive.read(index);
    } catch (err) {
      const kind = err instanceof ContainerError ? err.name : "error";
      report.add("format/container", false, `example ${index}: ${kind}: ${err}`);
      continue;
    }
    report.add("format/container", true, `example ${index}`);
    for (const check of validateExample(example)) {
      report.add(check.code, check.passed, `example ${index}: ${check.detail}`);
    }
  }
  return report.freeze();
}
