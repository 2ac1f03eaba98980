/** Container failure taxonomy, mirroring the format specification. */

export class ContainerError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

export class CorruptManifestError extends ContainerError {}

export class TruncatedPayloadError extends ContainerError {}

export class UnknownVersionError extends ContainerError {}
