import type {
  AlphaResponse, ApiClient, ApiError, CorpusSummary, EmbedResponse,
  EmbeddingResponse, GeometrySpec, GeometrySummary, ReducerRequest,
  ReportResponse, SpecResponse,
} from "./types.js";

function apiError(status: number, detail: string): ApiError {
  const err = new Error(`HTTP ${status}: ${detail}`) as ApiError;
  err.status = status;
  err.detail = detail;
  return err;
}

async function request<T>(base: string, path: string, init: RequestInit = {},
                          signal?: AbortSignal): Promise<T> {
  const resp = await fetch(base + path, {
    headers: { "Content-Type": "application/json" },
    signal,
    ...init,
  });
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (typeof body.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw apiError(resp.status, detail);
  }
  return resp.json() as Promise<T>;
}

export class HttpApiClient implements ApiClient {
  constructor(private readonly base: string = "") {}

  corpusSummary(): Promise<CorpusSummary> {
    return request(this.base, "/corpus/summary");
  }

  putSpec(spec: GeometrySpec, signal?: AbortSignal): Promise<SpecResponse> {
    return request(this.base, "/geometry/spec",
                   { method: "PUT", body: JSON.stringify(spec) }, signal);
  }

  postEmbed(req: ReducerRequest, signal?: AbortSignal): Promise<EmbedResponse> {
    return request(this.base, "/embed",
                   { method: "POST", body: JSON.stringify(req) }, signal);
  }

  getEmbedding(signal?: AbortSignal): Promise<EmbeddingResponse> {
    return request(this.base, "/embedding", {}, signal);
  }

  getReport(signal?: AbortSignal): Promise<ReportResponse> {
    return request(this.base, "/report", {}, signal);
  }

  geometrySummary(): Promise<GeometrySummary> {
    return request(this.base, "/geometry/matrix/summary");
  }

  postAlpha(weights: number[], signal?: AbortSignal): Promise<AlphaResponse> {
    return request(this.base, "/alpha",
                   { method: "POST", body: JSON.stringify({ weights }) }, signal);
  }
}
