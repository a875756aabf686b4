/** Typed HTTP client for the review service.

Failures split into two kinds the workbench treats differently:
`ApiError` is a structured refusal from the service (validation, conflict,
missing item) and carries the service's own wording; `TransportError`
means the service could not be reached or answered with something that
is not the error envelope.
*/

import {
  ApiErrorBody,
  CorrectionPayload,
  DocRecord,
  ItemStatus,
  QueuePage,
  ReviewItem,
  TableData,
} from "./types.js";

/** Structured non-2xx response: the service explained what it rejected. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly violations: readonly string[] = [],
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Network failure or a response body the client cannot interpret. */
export class TransportError extends Error {
  constructor(message: string, override readonly cause?: unknown) {
    super(message);
    this.name = "TransportError";
  }
}

export interface HealthStatus {
  status: string;
  models_loaded: boolean;
}

export interface ExtractResult {
  results: Array<DocRecord & { table: TableData }>;
}

export interface TrainExport {
  ndjson: string;
  count: number;
}

function isErrorBody(value: unknown): value is ApiErrorBody {
  return (
    typeof value === "object" &&
    value !== null &&
    typeof (value as ApiErrorBody).code === "string" &&
    typeof (value as ApiErrorBody).message === "string"
  );
}

export class ApiClient {
  private readonly base: string;

  constructor(
    baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {
    this.base = baseUrl.replace(/\/+$/, "");
  }

  private async request(
    method: "GET" | "POST",
    path: string,
    body?: unknown,
  ): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (cause) {
      throw new TransportError(`request to ${path} failed: ${String(cause)}`, cause);
    }
    if (!response.ok) {
      const text = await response.text();
      let parsed: unknown;
      try {
        parsed = JSON.parse(text);
      } catch {
        parsed = undefined;
      }
      if (isErrorBody(parsed)) {
        throw new ApiError(response.status, parsed.code, parsed.message, parsed.violations ?? []);
      }
      throw new ApiError(response.status, "http_error", text || response.statusText);
    }
    return response;
  }

  private async json<T>(method: "GET" | "POST", path: string, body?: unknown): Promise<T> {
    const response = await this.request(method, path, body);
    try {
      return (await response.json()) as T;
    } catch (cause) {
      throw new TransportError(`response from ${path} is not JSON`, cause);
    }
  }

  health(): Promise<HealthStatus> {
    return this.json("GET", "/healthz");
  }

  listQueue(status: ItemStatus = "pending", page = 1): Promise<QueuePage> {
    const query = new URLSearchParams({ status, page: String(page) });
    return this.json("GET", `/queue?${query}`);
  }

  getItem(itemId: number): Promise<ReviewItem> {
    return this.json("GET", `/items/${itemId}`);
  }

  submitCorrection(itemId: number, payload: CorrectionPayload): Promise<ReviewItem> {
    return this.json("POST", `/items/${itemId}/correction`, payload);
  }

  extract(sentences: readonly string[]): Promise<ExtractResult> {
    return this.json("POST", "/extract", { sentences });
  }

  enqueueSentences(sentences: readonly string[]): Promise<{ items: ReviewItem[] }> {
    return this.json("POST", "/queue", { sentences });
  }

  async exportTrain(includeRejected = false): Promise<TrainExport> {
    const query = includeRejected ? "?include_rejected=true" : "";
    const response = await this.request("GET", `/export/train${query}`);
    const ndjson = await response.text();
    const count = Number(response.headers.get("x-export-count") ?? "0");
    return { ndjson, count };
  }
}
