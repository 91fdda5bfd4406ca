export { TrajectoryLogger } from "./logger.js";
export type { LoggerOptions, RecordingMode } from "./logger.js";
export { Crc32, crc32 } from "./crc32.js";
export {
  CoverageError,
  DataError,
  FormatError,
  IoError,
  ParameterError,
} from "./errors.js";
