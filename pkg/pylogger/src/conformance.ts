/**
 * Conformance runner: replays a JSON instruction corpus through
 * TrajectoryLogger so an external harness can compare the resulting files
 * byte-for-byte against another TDLG writer.
 *
 * Usage: node dist/conformance.js <instructions.json>
 *
 * Instruction schema:
 *   { "logs": [ { "path", "nSamples", "nClasses", "mode": "train"|"eval",
 *                 "labels": [...],
 *                 "epochs": [ [ { "indices": [...], "rows": [[...], ...] },
 *                               ... ],    // batches of epoch 0
 *                             ... ] } ] }
 */

import * as fs from "node:fs";

import { TrajectoryLogger, type RecordingMode } from "./logger.js";

interface BatchSpec {
  indices: number[];
  rows: number[][];
}

interface LogSpec {
  path: string;
  nSamples: number;
  nClasses: number;
  mode: RecordingMode;
  labels: number[];
  epochs: BatchSpec[][];
}

function main(argv: string[]): number {
  const instructionsPath = argv[2];
  if (!instructionsPath) {
    console.error("usage: node conformance.js <instructions.json>");
    return 2;
  }
  const spec = JSON.parse(fs.readFileSync(instructionsPath, "utf8")) as {
    logs: LogSpec[];
  };
  for (const log of spec.logs) {
    const logger = new TrajectoryLogger({
      path: log.path,
      nSamples: log.nSamples,
      nClasses: log.nClasses,
      labels: log.labels,
      recordingMode: log.mode,
    });
    log.epochs.forEach((batches, epoch) => {
      for (const batch of batches) {
        logger.recordBatch(epoch, batch.indices, batch.rows);
      }
      logger.endEpoch();
    });
    logger.close();
  }
  console.log(`wrote ${spec.logs.length} logs`);
  return 0;
}

process.exit(main(process.argv));
