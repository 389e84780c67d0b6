import { ClusterEditorModel, renormalizeWeights } from "./model.js";
import { ScatterViewModel } from "./scatter.js";
import type {
  ApiClient, ApiError, CorpusSummary, GeometrySpec, MeasureReport,
  ReducerRequest,
} from "./types.js";

export interface Scheduler {
  set(fn: () => void, ms: number): unknown;
  clear(handle: unknown): void;
}

const realScheduler: Scheduler = {
  set: (fn, ms) => setTimeout(fn, ms),
  clear: (h) => clearTimeout(h as Parameters<typeof clearTimeout>[0]),
};

export interface ControllerOptions {
  debounceMs?: number;
  scheduler?: Scheduler;
  onChange?: () => void;
}

/**
 * The studio loop: edits go to the model, parameter tweaks auto-apply after a
 * debounce while membership edits wait for an explicit apply; each apply is
 * one PUT + one embed + one refresh. Only one recompute is in flight at a
 * time; anything superseded is aborted and its late responses are dropped.
 * Every displayed number comes from a server response.
 */
export class StudioController {
  model = new ClusterEditorModel();
  scatter: ScatterViewModel | null = null;
  report: MeasureReport | null = null;
  summary: CorpusSummary | null = null;
  alpha: number[] | null = null;
  components: string[] | null = null;
  fieldErrors = new Map<string, string>();
  status = "";
  busy = false;
  revision = 0;

  reducerRequest: ReducerRequest = { reducer: "tsne" };

  private readonly debounceMs: number;
  private readonly scheduler: Scheduler;
  private readonly onChange: () => void;
  private pendingApply: unknown = null;
  private pendingAlpha: unknown = null;
  private seq = 0;
  private inflight: AbortController | null = null;

  constructor(private readonly api: ApiClient, opts: ControllerOptions = {}) {
    this.debounceMs = opts.debounceMs ?? 400;
    this.scheduler = opts.scheduler ?? realScheduler;
    this.onChange = opts.onChange ?? (() => {});
  }

  async init(spec?: GeometrySpec): Promise<void> {
    this.summary = await this.api.corpusSummary();
    try {
      const geom = await this.api.geometrySummary();
      this.components = geom.components;
      this.alpha = geom.alpha;
      if (spec === undefined && geom.clusters) {
        spec = {
          clusters: geom.clusters.map((c) => ({
            name: c.name, words: [], rho_self: c.rho_self,
            importance: c.importance,
          })),
          rho_pairs: [],
        };
      }
    } catch {
      this.components = null;
    }
    if (spec) this.model = ClusterEditorModel.fromSpec(spec);
    try {
      await this.refreshViews(this.seq);
    } catch {
      /* nothing computed server-side yet */
    }
    this.onChange();
  }

  loadSpec(spec: GeometrySpec): void {
    this.model = ClusterEditorModel.fromSpec(spec);
    this.fieldErrors.clear();
    this.onChange();
  }

  exportSpec(): GeometrySpec {
    return this.model.toSpec();
  }

  get alphaAvailable(): boolean {
    return this.components !== null && this.components.length > 0;
  }

  // -- parameter edits: debounced auto-apply --------------------------------

  editRhoSelf(cluster: string, value: number): void {
    this.model.setRhoSelf(cluster, value);
    this.scheduleApply();
  }

  editImportance(cluster: string, value: number): void {
    this.model.setImportance(cluster, value);
    this.scheduleApply();
  }

  editPair(a: string, b: string, value: number): void {
    this.model.setPair(a, b, value);
    this.scheduleApply();
  }

  /** membership edits recompute only on an explicit apply */
  moveWord(word: string, from: string, to: string): void {
    this.model.moveWord(word, from, to);
    this.onChange();
  }

  private scheduleApply(): void {
    if (this.pendingApply !== null) this.scheduler.clear(this.pendingApply);
    this.pendingApply = this.scheduler.set(() => {
      this.pendingApply = null;
      void this.applyNow();
    }, this.debounceMs);
    this.onChange();
  }

  async applyNow(): Promise<void> {
    if (this.pendingApply !== null) {
      this.scheduler.clear(this.pendingApply);
      this.pendingApply = null;
    }
    this.fieldErrors.clear();
    const problems = this.model.validate();
    if (problems.length > 0) {
      for (const p of problems) this.fieldErrors.set(p.field, p.message);
      this.status = "fix validation errors before applying";
      this.onChange();
      return;
    }
    const mySeq = this.beginRecompute();
    const signal = this.inflight!.signal;
    try {
      const spec = this.model.toSpec();
      const put = await this.api.putSpec(spec, signal);
      if (this.stale(mySeq)) return;
      this.revision = put.revision;
      const embed = await this.api.postEmbed(this.reducerRequest, signal);
      if (this.stale(mySeq)) return;
      this.revision = embed.revision;
      await this.refreshViews(mySeq, signal);
      if (this.stale(mySeq)) return;
      this.model.markClean();
      this.status = `revision ${this.revision}` + (embed.cached ? " (cached)" : "");
    } catch (err) {
      if (this.stale(mySeq) || (err as Error).name === "AbortError") return;
      this.attributeServerError(err as ApiError);
    } finally {
      if (!this.stale(mySeq)) this.busy = false;
      this.onChange();
    }
  }

  // -- combination weights ---------------------------------------------------

  setAlphaSlider(index: number, value: number): void {
    if (!this.alphaAvailable) return;
    const current = this.alpha ?? this.components!.map(
      () => 1 / this.components!.length);
    this.alpha = renormalizeWeights(current, index, value);
    if (this.pendingAlpha !== null) this.scheduler.clear(this.pendingAlpha);
    this.pendingAlpha = this.scheduler.set(() => {
      this.pendingAlpha = null;
      void this.pushAlpha();
    }, this.debounceMs);
    this.onChange();
  }

  async pushAlpha(): Promise<void> {
    if (!this.alphaAvailable || this.alpha === null) return;
    if (this.pendingAlpha !== null) {
      this.scheduler.clear(this.pendingAlpha);
      this.pendingAlpha = null;
    }
    const mySeq = this.beginRecompute();
    const signal = this.inflight!.signal;
    try {
      const resp = await this.api.postAlpha(this.alpha, signal);
      if (this.stale(mySeq)) return;
      this.revision = resp.revision;
      this.alpha = resp.alpha;
      await this.refreshViews(mySeq, signal);
      if (this.stale(mySeq)) return;
      this.status = `revision ${this.revision}`;
    } catch (err) {
      if (this.stale(mySeq) || (err as Error).name === "AbortError") return;
      this.fieldErrors.set("alpha", (err as ApiError).detail
        ?? (err as Error).message);
      this.status = "weight update rejected";
    } finally {
      if (!this.stale(mySeq)) this.busy = false;
      this.onChange();
    }
  }

  // -- shared plumbing -------------------------------------------------------

  private beginRecompute(): number {
    this.inflight?.abort();
    this.inflight = new AbortController();
    this.busy = true;
    return ++this.seq;
  }

  private stale(mySeq: number): boolean {
    return mySeq !== this.seq;
  }

  private async refreshViews(mySeq: number, signal?: AbortSignal): Promise<void> {
    const embedding = await this.api.getEmbedding(signal);
    if (this.stale(mySeq)) return;
    const report = await this.api.getReport(signal);
    if (this.stale(mySeq)) return;
    this.scatter = ScatterViewModel.fromEmbedding(embedding);
    this.report = report.report;
    this.revision = Math.max(this.revision, embedding.revision, report.revision);
  }

  private attributeServerError(err: ApiError): void {
    const detail = err.detail ?? err.message;
    let field = "spec";
    for (const row of this.model.rows) {
      if (detail.includes(`'${row.name}'`) || detail.includes(`"${row.name}"`)
          || detail.includes(` ${row.name} `) || detail.endsWith(` ${row.name}`)) {
        field = `cluster:${row.name}`;
        break;
      }
      if (row.words.some((w) => detail.includes(`'${w}'`))) {
        field = `cluster:${row.name}:words`;
        break;
      }
    }
    this.fieldErrors.set(field, detail);
    this.status = `server rejected the spec (${err.status ?? "?"})`;
  }
}
