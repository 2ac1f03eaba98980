export {
  parseExample,
  FORMAT_VERSION,
  MAGIC,
  ITEM_SIZE,
  type DTypeCode,
  type LoadedExample,
  type LoadedField,
} from "./container.js";
export {
  DatasetArchive,
  entryName,
  loadExample,
  type ArchiveManifest,
} from "./archive.js";
export {
  ContainerError,
  CorruptManifestError,
  TruncatedPayloadError,
  UnknownVersionError,
} from "./errors.js";
export { expectedShapes, geometryFromMeta, type ExampleGeometry } from "./shapes.js";
export {
  validateArchive,
  validateExample,
  type CheckResult,
  type ValidationReport,
} from "./validate.js";
