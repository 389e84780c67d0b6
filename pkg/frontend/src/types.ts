/** Wire types mirroring the pipeline service JSON. */

export interface ClusterSpec {
  name: string;
  words: string[];
  rho_self: number;
  importance: number;
}

export interface PairSpec {
  a: string;
  b: string;
  value: number;
}

export interface GeometrySpec {
  clusters: ClusterSpec[];
  rho_pairs: PairSpec[];
  default_cluster?: string;
  tree?: unknown;
  beta?: number;
}

export interface CorpusSummary {
  n_docs: number;
  vocab_size: number;
  has_labels: boolean;
  label_counts: Record<string, number>;
  vocab_preview: string[];
}

export interface SpecResponse {
  revision: number;
  geometry: string;
  cached: boolean;
  shape: number[];
}

export interface EmbedResponse {
  revision: number;
  cached: boolean;
}

export interface EmbeddingResponse {
  ids: string[];
  points: [number, number][];
  labels: string[] | null;
  provenance: Record<string, unknown>;
  revision: number;
}

export interface MeasureReport {
  measure_i: number;
  measure_ii: number;
  measure_iii: { k: number; accuracy: number };
  measure_iv?: number;
  geometry: string;
  reducer: string;
  seed: number | null;
}

export interface ReportResponse {
  report: MeasureReport;
  revision: number;
}

export interface GeometrySummary {
  provenance: string;
  shape: number[];
  alpha: number[] | null;
  components: string[] | null;
  method?: string;
  clusters?: { name: string; size: number; rho_self: number; importance: number }[];
  block_affinity?: number[][];
}

export interface AlphaResponse {
  revision: number;
  alpha: number[];
}

export interface ReducerRequest {
  reducer: "pca" | "tsne";
  config?: Record<string, number>;
}

export interface ApiError extends Error {
  status: number;
  detail: string;
}

/** Everything the studio needs from the server; injectable for tests. */
export interface ApiClient {
  corpusSummary(): Promise<CorpusSummary>;
  putSpec(spec: GeometrySpec, signal?: AbortSignal): Promise<SpecResponse>;
  postEmbed(req: ReducerRequest, signal?: AbortSignal): Promise<EmbedResponse>;
  getEmbedding(signal?: AbortSignal): Promise<EmbeddingResponse>;
  getReport(signal?: AbortSignal): Promise<ReportResponse>;
  geometrySummary(): Promise<GeometrySummary>;
  postAlpha(weights: number[], signal?: AbortSignal): Promise<AlphaResponse>;
}
