export * from "./types.js";
export * from "./invariants.js";
export { assembleTable, assembleRecord } from "./assemble.js";
export { ApiClient, ApiError, TransportError } from "./api.js";
export type { ExtractResult, HealthStatus, TrainExport } from "./api.js";
export { ReviewViewModel } from "./viewmodel.js";
export { ReviewSession } from "./session.js";
export type { SubmitResult } from "./session.js";
