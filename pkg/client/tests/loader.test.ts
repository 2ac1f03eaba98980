import { describe, expect, it } from "vitest";
import { fileURLToPath } from "node:url";
import { join } from "node:path";

import {
  DatasetArchive,
  TruncatedPayloadError,
  CorruptManifestError,
  UnknownVersionError,
  loadExample,
  parseExample,
} from "../src/index.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));
const clean = (name: string) => join(FIXTURES, "clean", `${name}.zip`);

describe("example loading", () => {
  it("materializes the noiseless one-qubit schema", async () => {
    const ex = await loadExample(clean("G_1q_X"), 0);
    expect(ex.fields.size).toBe(18);
    expect(ex.fields.get("H0")?.shape).toEqual([1, 32, 2, 2]);
    expect(ex.fields.get("H0")?.dtype).toBe("c128");
    expect(ex.fields.get("E_O")?.shape).toEqual([18]);
    expect(ex.fields.get("noise")?.shape).toEqual([1, 32, 8, 0]);
    expect(ex.fields.get("noise")?.data.length).toBe(0);
    expect(ex.meta.name).toBe("G_1q_X");
    expect(ex.meta.dim).toBe(2);
    expect(ex.elapsedTime).toBe(0);
  });

  it("materializes the two-qubit schema", async () => {
    const ex = await loadExample(clean("G_2q_IX-XI_IZ-ZI_N1-N6"), 1);
    expect(ex.fields.get("E_O")?.shape).toEqual([540]);
    expect(ex.fields.get("U_I")?.shape).toEqual([1, 1, 8, 4, 4]);
    expect(ex.fields.get("V_O")?.shape).toEqual([540, 8]);
    expect(ex.meta.noise_profile).toEqual(["N1", "N6"]);
  });

  it("decodes complex fields as interleaved doubles", async () => {
    const ex = await loadExample(clean("G_1q_X"), 0);
    const u0 = ex.fields.get("U0")!;
    // the first stored step unitary has |det| = 1; recompute from parts
    const [a, b, c, d] = [0, 1, 2, 3].map((k) => ({
      re: u0.data[2 * k],
      im: u0.data[2 * k + 1],
    }));
    const detRe = a.re * d.re - a.im * d.im - (b.re * c.re - b.im * c.im);
    const detIm = a.re * d.im + a.im * d.re - (b.re * c.im + b.im * c.re);
    expect(Math.hypot(detRe, detIm)).toBeCloseTo(1.0, 12);
  });

  it("reads archive level metadata", async () => {
    const archive = await DatasetArchive.open(clean("G_1q_X_Z_N2"));
    expect(archive.numExamples).toBe(2);
    expect(archive.exampleIndices()).toEqual([0, 1]);
    expect(archive.manifest.name).toBe("G_1q_X_Z_N2");
    expect(archive.manifest.config.K).toBe(8);
    await expect(archive.read(5)).rejects.toThrow(RangeError);
  });

  it("raises the documented corruption taxonomy", async () => {
    const archive = await DatasetArchive.open(clean("G_1q_X"));
    const blob = await archive.readBytes(0);
    expect(() => parseExample(blob.subarray(0, blob.length - 1))).toThrow(
      TruncatedPayloadError
    );
    const badMagic = Buffer.from(blob);
    badMagic.write("ZZZZ", 0, "latin1");
    expect(() => parseExample(badMagic)).toThrow(CorruptManifestError);
    const badVersion = Buffer.from(blob);
    badVersion.writeUInt32LE(9, 4);
    expect(() => parseExample(badVersion)).toThrow(UnknownVersionError);
    expect(() => parseExample(Buffer.concat([blob, Buffer.from([0])]))).toThrow(
      CorruptManifestError
    );
    for (const cut of [0, 3, 15, 40, blob.length >> 1]) {
      expect(() => parseExample(blob.subarray(0, cut))).toThrow();
    }
  });
});
