import * as fs from "node:fs";

import { Crc32 } from "./crc32.js";
import {
  CoverageError,
  DataError,
  FormatError,
  IoError,
  ParameterError,
} from "./errors.js";

export type RecordingMode = "train" | "eval";

export interface LoggerOptions {
  /** Destination file; staged at `path + ".tmp"` until close() succeeds. */
  path: string;
  nSamples: number;
  nClasses: number;
  /** One class index in [0, nClasses) per sample. */
  labels: ArrayLike<number>;
  /** "train": probabilities captured mid-epoch; "eval": after the epoch. */
  recordingMode?: RecordingMode;
}

const MAGIC = "TDLG";
const VERSION = 1;
const PAYLOAD_FULL_PROBS = 0;
const MODE_CODE: Record<RecordingMode, number> = { train: 0, eval: 1 };
const HEADER_BYTES = 28;
const EPOCHS_FIELD_OFFSET = 24;
const ROW_SUM_TOL = 1e-4;
const CRC_CHUNK = 64 * 1024;

/**
 * Single-writer logging shim for training loops.
 *
 * Per epoch: any number of recordBatch() calls (indices may arrive in any
 * order across batches), then one endEpoch(), which verifies that every
 * sample index was covered exactly once and flushes the epoch block to
 * disk. close() patches the epoch count into the header, computes the
 * trailing CRC-32, and publishes the file. Only one epoch buffer is ever
 * resident.
 *
 * Calls are not thread-safe; callers must serialize them externally.
 */
export class TrajectoryLogger {
  readonly path: string;
  readonly nSamples: number;
  readonly nClasses: number;
  readonly recordingMode: RecordingMode;

  private readonly tmpPath: string;
  private readonly fd: number;
  private readonly rowBuffer: Float32Array;
  private readonly blockBytes: Buffer;
  private readonly coverage: Uint32Array;
  private position: number;
  private currentEpoch = 0;
  private batchesInEpoch = 0;
  private state: "open" | "closed" | "aborted" = "open";

  constructor(options: LoggerOptions) {
    const { path, nSamples, nClasses, labels } = options;
    if (!Number.isInteger(nSamples) || nSamples < 1) {
      throw new ParameterError(`nSamples must be an integer >= 1, got ${nSamples}`);
    }
    if (!Number.isInteger(nClasses) || nClasses < 2) {
      throw new ParameterError(`nClasses must be an integer >= 2, got ${nClasses}`);
    }
    if (labels.length !== nSamples) {
      throw new ParameterError(
        `labels length ${labels.length} does not match nSamples ${nSamples}`,
      );
    }
    const labelWords = new Uint32Array(nSamples);
    for (let i = 0; i < nSamples; i++) {
      const label = labels[i];
      if (!Number.isInteger(label) || label < 0 || label >= nClasses) {
        throw new DataError(
          `labels must lie in [0, ${nClasses}), got ${label} at index ${i}`,
        );
      }
      labelWords[i] = label;
    }
    this.path = path;
    this.nSamples = nSamples;
    this.nClasses = nClasses;
    this.recordingMode = options.recordingMode ?? "train";
    this.tmpPath = path + ".tmp";
    this.rowBuffer = new Float32Array(nSamples * nClasses);
    this.blockBytes = Buffer.alloc(nSamples * nClasses * 4);
    this.coverage = new Uint32Array(nSamples);

    try {
      // "w+": close() reads the staged bytes back to compute the CRC.
      this.fd = fs.openSync(this.tmpPath, "w+");
    } catch (err) {
      throw new IoError(`cannot open ${this.tmpPath} for writing`, err);
    }
    const header = Buffer.alloc(HEADER_BYTES + 4 * nSamples);
    header.write(MAGIC, 0, "ascii");
    header.writeUInt32LE(VERSION, 4);
    header.writeUInt8(PAYLOAD_FULL_PROBS, 8);
    header.writeUInt8(MODE_CODE[this.recordingMode], 9);
    header.writeUInt16LE(0, 10);
    header.writeBigUInt64LE(BigInt(nSamples), 12);
    header.writeUInt32LE(nClasses, 20);
    header.writeUInt32LE(0, EPOCHS_FIELD_OFFSET); // epoch count patched on close
    for (let i = 0; i < nSamples; i++) {
      header.writeUInt32LE(labelWords[i], HEADER_BYTES + 4 * i);
    }
    this.position = 0;
    this.write(header);
  }

  /**
   * Record probability rows for a batch of sample indices in the given
   * epoch. Rows wider than float32 are narrowed with round-to-nearest
   * (Math.fround), and all validation applies to the narrowed values; the
   * whole batch is validated before any of it is committed.
   */
  recordBatch(
    epoch: number,
    sampleIndices: ArrayLike<number>,
    probRows: ReadonlyArray<ArrayLike<number>>,
  ): void {
    this.requireOpen();
    if (epoch !== this.currentEpoch) {
      throw new ParameterError(
        `epoch ${epoch} out of order; the open epoch is ${this.currentEpoch}`,
      );
    }
    if (sampleIndices.length !== probRows.length) {
      throw new ParameterError(
        `got ${sampleIndices.length} indices for ${probRows.length} rows`,
      );
    }
    const narrowed = new Float32Array(probRows.length * this.nClasses);
    for (let r = 0; r < probRows.length; r++) {
      const index = sampleIndices[r];
      if (!Number.isInteger(index) || index < 0 || index >= this.nSamples) {
        throw new ParameterError(
          `sample index ${index} out of range for N=${this.nSamples}`,
        );
      }
      const row = probRows[r];
      if (row.length !== this.nClasses) {
        throw new FormatError(
          `probability row length ${row.length}, expected ${this.nClasses}`,
        );
      }
      let sum = 0;
      for (let j = 0; j < this.nClasses; j++) {
        const value = Math.fround(row[j]);
        if (!Number.isFinite(value)) {
          throw new DataError(`row for sample ${index} contains a non-finite entry`);
        }
        if (value < 0 || value > 1) {
          throw new DataError(
            `row for sample ${index} has entry ${value} outside [0, 1]`,
          );
        }
        narrowed[r * this.nClasses + j] = value;
        sum += value;
      }
      if (Math.abs(sum - 1) > ROW_SUM_TOL) {
        throw new DataError(
          `row for sample ${index} sums to ${sum.toFixed(6)}, ` +
            `outside 1 +/- ${ROW_SUM_TOL}`,
        );
      }
    }
    for (let r = 0; r < probRows.length; r++) {
      const index = sampleIndices[r] as number;
      this.rowBuffer.set(
        narrowed.subarray(r * this.nClasses, (r + 1) * this.nClasses),
        index * this.nClasses,
      );
      this.coverage[index] += 1;
    }
    this.batchesInEpoch += 1;
  }

  /**
   * Verify that every sample index 0..N-1 was recorded exactly once in the
   * open epoch, then flush the epoch block to disk.
   */
  endEpoch(): void {
    this.requireOpen();
    for (let i = 0; i < this.nSamples; i++) {
      if (this.coverage[i] === 0) {
        throw new CoverageError(
          `epoch ${this.currentEpoch}: sample index ${i} was not recorded`,
        );
      }
      if (this.coverage[i] > 1) {
        throw new CoverageError(
          `epoch ${this.currentEpoch}: sample index ${i} recorded ` +
            `${this.coverage[i]} times`,
        );
      }
    }
    const view = new DataView(
      this.blockBytes.buffer,
      this.blockBytes.byteOffset,
      this.blockBytes.length,
    );
    for (let i = 0; i < this.rowBuffer.length; i++) {
      view.setFloat32(4 * i, this.rowBuffer[i], true);
    }
    this.write(this.blockBytes);
    this.coverage.fill(0);
    this.rowBuffer.fill(0);
    this.currentEpoch += 1;
    this.batchesInEpoch = 0;
  }

  /**
   * Patch the epoch count into the header, append the CRC-32 of every byte
   * after the magic, and publish the staged file at its final path.
   * Returns the total file size in bytes.
   */
  close(): number {
    this.requireOpen();
    if (this.batchesInEpoch > 0) {
      throw new ParameterError(
        `close() with an unflushed epoch ${this.currentEpoch}; call endEpoch() first`,
      );
    }
    if (this.currentEpoch < 2) {
      this.abort();
      throw new FormatError(
        `a trajectory needs T >= 2 epochs, got ${this.currentEpoch}`,
      );
    }
    const epochsField = Buffer.alloc(4);
    epochsField.writeUInt32LE(this.currentEpoch, 0);
    this.writeAt(epochsField, EPOCHS_FIELD_OFFSET);

    const crc = new Crc32();
    const chunk = Buffer.alloc(CRC_CHUNK);
    let offset = 4; // everything after the magic
    while (offset < this.position) {
      const want = Math.min(CRC_CHUNK, this.position - offset);
      const got = fs.readSync(this.fd, chunk, 0, want, offset);
      if (got <= 0) {
        throw new IoError(`short read while checksumming ${this.tmpPath}`);
      }
      crc.update(chunk.subarray(0, got));
      offset += got;
    }
    const trailer = Buffer.alloc(4);
    trailer.writeUInt32LE(crc.value, 0);
    this.write(trailer);

    fs.closeSync(this.fd);
    fs.renameSync(this.tmpPath, this.path);
    this.state = "closed";
    return this.position;
  }

  /** Discard the staged file; the final path is never created. */
  abort(): void {
    if (this.state !== "open") {
      return;
    }
    fs.closeSync(this.fd);
    fs.rmSync(this.tmpPath, { force: true });
    this.state = "aborted";
  }

  private requireOpen(): void {
    if (this.state !== "open") {
      throw new ParameterError(`logger is ${this.state}`);
    }
  }

  private write(data: Buffer): void {
    this.writeAt(data, this.position);
    this.position += data.length;
  }

  private writeAt(data: Buffer, position: number): void {
    let written = 0;
    while (written < data.length) {
      written += fs.writeSync(
        this.fd,
        data,
        written,
        data.length - written,
        position + written,
      );
    }
  }
}
