/**
 * Parser for .qex example entries.
 *
 * Layout: magic "QDS1" | u32 LE version | u64 LE manifest length | JSON
 * manifest | raw payload. The manifest carries scalar metadata ("meta",
 * "elapsed_time") and a field table of {name, dtype, shape, offset,
 * nbytes}. Payload arrays are little-endian: "f64" fields are IEEE754
 * doubles, "c128" fields interleave real/imag doubles; both row-major in
 * the declared shape order.
 */

import {
  CorruptManifestError,
  TruncatedPayloadError,
  UnknownVersionError,
} from "./errors.js";

export const MAGIC = "QDS1";
export const FORMAT_VERSION = 1;
const HEADER_BYTES = 16;

export type DTypeCode = "f64" | "c128";

export const ITEM_SIZE: Record<DTypeCode, number> = { f64: 8, c128: 16 };

export interface LoadedField {
  dtype: DTypeCode;
  shape: number[];
  /** Interleaved re/im pairs for c128; plain values for f64. */
  data: Float64Array;
  /** The exact payload bytes of this field. */
  raw: Buffer;
}

export interface LoadedExample {
  meta: Record<string, unknown>;
  elapsedTime: number;
  fields: Map<string, LoadedField>;
}

interface ManifestField {
  name: string;
  dtype: string;
  shape: number[];
  offset: number;
  nbytes: number;
}

function elementCount(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}

export function parseExample(buf: Buffer): LoadedExample {
  if (buf.length < HEADER_BYTES) {
    throw new TruncatedPayloadError("shorter than the fixed header");
  }
  if (buf.toString("latin1", 0, 4) !== MAGIC) {
    throw new CorruptManifestError(`bad magic ${buf.toString("latin1", 0, 4)}`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== FORMAT_VERSION) {
    throw new UnknownVersionError(`unsupported container version ${version}`);
  }
  const manifestLen = buf.readBigUInt64LE(8);
  if (manifestLen > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new CorruptManifestError("absurd manifest length");
  }
  const headerEnd = HEADER_BYTES + Number(manifestLen);
  if (buf.length < headerEnd) {
    throw new TruncatedPayloadError("manifest extends past end of file");
  }
  let manifest: {
    meta?: Record<string, unknown>;
    elapsed_time?: number;
    fields?: ManifestField[];
  };
  try {
    manifest = JSON.parse(buf.toString("utf8", HEADER_BYTES, headerEnd));
  } catch (err) {
    throw new CorruptManifestError(`manifest is not valid JSON: ${err}`);
  }
  if (!manifest || typeof manifest !== "object" || !Array.isArray(manifest.fields)) {
    throw new CorruptManifestError("manifest lacks a field table");
  }
  const payload = buf.subarray(headerEnd);
  const fields = new Map<string, LoadedField>();
  let expected = 0;
  for (const entry of manifest.fields) {
    const { name, dtype, shape, offset, nbytes } = entry ?? {};
    if (
      typeof name !== "string" ||
      !Array.isArray(shape) ||
      !Number.isInteger(offset) ||
      !Number.isInteger(nbytes)
    ) {
      throw new CorruptManifestError(`malformed field entry ${JSON.stringify(entry)}`);
    }
    if (dtype !== "f64" && dtype !== "c128") {
      throw new CorruptManifestError(`unknown dtype code ${dtype}`);
    }
    if (shape.some((s) => !Number.isInteger(s) || s < 0)) {
      throw new CorruptManifestError(`bad dimension in ${name}`);
    }
    const count = elementCount(shape);
    if (count * ITEM_SIZE[dtype] !== nbytes) {
      throw new CorruptManifestError(
        `${name}: shape [${shape}] disagrees with ${nbytes} bytes`
      );
    }
    if (offset !== expected) {
      throw new CorruptManifestError(`${name}: offset ${offset}, expected ${expected}`);
    }
    expected += nbytes;
    if (offset + nbytes > payload.length) {
      throw new TruncatedPayloadError(
        `${name} needs bytes up to ${offset + nbytes}, payload has ${payload.length}`
      );
    }
    const raw = Buffer.from(payload.subarray(offset, offset + nbytes));
    // copy into an aligned buffer before viewing as doubles
    const aligned = new ArrayBuffer(raw.length);
    new Uint8Array(aligned).set(raw);
    fields.set(name, {
      dtype,
      shape: shape.slice(),
      data: new Float64Array(aligned),
      raw,
    });
  }
  if (expected !== payload.length) {
    throw new CorruptManifestError(
      `payload has ${payload.length} bytes, manifest covers ${expected}`
    );
  }
  return {
    meta: manifest.meta ?? {},
    elapsedTime: Number(manifest.elapsed_time ?? 0),
    fields,
  };
}
