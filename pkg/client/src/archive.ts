/** Zip-level access to packaged datasets. */

import { readFile } from "node:fs/promises";
import JSZip from "jszip";

import { parseExample, type LoadedExample } from "./container.js";
import { CorruptManifestError } from "./errors.js";

export interface ArchiveManifest {
  format: string;
  version: number;
  name: string;
  num_examples: number;
  config: Record<string, unknown>;
  [key: string]: unknown;
}

export function entryName(index: number): string {
  return `ex_${String(index).padStart(5, "0")}.qex`;
}

export class DatasetArchive {
  private constructor(
    readonly path: string,
    readonly manifest: ArchiveManifest,
    private readonly zip: JSZip
  ) {}

  static async open(path: string): Promise<DatasetArchive> {
    const zip = await JSZip.loadAsync(await readFile(path));
    const entry = zip.file("manifest.json");
    if (!entry) {
      throw new CorruptManifestError("archive lacks manifest.json");
    }
    let manifest: ArchiveManifest;
    try {
      manifest = JSON.parse(await entry.async("string"));
    } catch (err) {
      throw new CorruptManifestError(`bad archive manifest: ${err}`);
    }
    return new DatasetArchive(path, manifest, zip);
  }

  get numExamples(): number {
    return Number(this.manifest.num_examples);
  }

  exampleIndices(): number[] {
    const out: number[] = [];
    this.zip.forEach((name) => {
      const m = /^ex_(\d{5})\.qex$/.exec(name);
      if (m) out.push(Number(m[1]));
    });
    return out.sort((a, b) => a - b);
  }

  async readBytes(index: number): Promise<Buffer> {
    const entry = this.zip.file(entryName(index));
    if (!entry) {
      throw new RangeError(`example ${index} not in ${this.path}`);
    }
    return entry.async("nodebuffer");
  }

  async read(index: number): Promise<LoadedExample> {
    return parseExample(await this.readBytes(index));
  }
}

/** Load one example from an archive produced by the dataset generator. */
export async function loadExample(
  path: string,
  index: number
): Promise<LoadedExample> {
  const archive = await DatasetArchive.open(path);
  return archive.read(index);
}
