import type { GeometrySpec } from "./types.js";

export interface FieldError {
  /** e.g. "cluster:positive:rho_self" or "pair:a|b" or "spec" */
  field: string;
  message: string;
}

export interface ClusterRow {
  name: string;
  words: string[];
  rhoSelf: number;
  importance: number;
  dirty: { words: boolean; rhoSelf: boolean; importance: boolean };
}

function pairKey(a: string, b: string): string {
  return a <= b ? `${a}|${b}` : `${b}|${a}`;
}

/**
 * Editable mirror of the manual geometry spec JSON. Exporting and re-importing
 * yields an identical model; validation duplicates the server's invariants so
 * obviously bad specs never leave the browser.
 */
export class ClusterEditorModel {
  rows: ClusterRow[] = [];
  pairs = new Map<string, number>();
  pairsDirty = new Set<string>();
  defaultCluster?: string;
  tree?: unknown;
  beta?: number;

  static fromSpec(spec: GeometrySpec): ClusterEditorModel {
    const model = new ClusterEditorModel();
    model.rows = spec.clusters.map((c) => ({
      name: c.name,
      words: [...c.words],
      rhoSelf: c.rho_self,
      importance: c.importance,
      dirty: { words: false, rhoSelf: false, importance: false },
    }));
    for (const p of spec.rho_pairs ?? []) {
      model.pairs.set(pairKey(p.a, p.b), p.value);
    }
    model.defaultCluster = spec.default_cluster;
    model.tree = spec.tree;
    model.beta = spec.beta;
    return model;
  }

  toSpec(): GeometrySpec {
    const spec: GeometrySpec = {
      clusters: this.rows.map((r) => ({
        name: r.name,
        words: [...r.words],
        rho_self: r.rhoSelf,
        importance: r.importance,
      })),
      rho_pairs: [...this.pairs.entries()]
        .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
        .map(([key, value]) => {
          const [a, b] = key.split("|");
          return { a, b, value };
        }),
    };
    if (this.defaultCluster !== undefined) spec.default_cluster = this.defaultCluster;
    if (this.tree !== undefined) spec.tree = this.tree;
    if (this.beta !== undefined) spec.beta = this.beta;
    return spec;
  }

  cluster(name: string): ClusterRow {
    const row = this.rows.find((r) => r.name === name);
    if (!row) throw new Error(`unknown cluster ${name}`);
    return row;
  }

  setRhoSelf(name: string, value: number): void {
    const row = this.cluster(name);
    row.rhoSelf = value;
    row.dirty.rhoSelf = true;
  }

  setImportance(name: string, value: number): void {
    const row = this.cluster(name);
    row.importance = value;
    row.dirty.importance = true;
  }

  setPair(a: string, b: string, value: number): void {
    const key = pairKey(a, b);
    this.pairs.set(key, value);
    this.pairsDirty.add(key);
  }

  pair(a: string, b: string): number {
    return this.pairs.get(pairKey(a, b)) ?? 0;
  }

  moveWord(word: string, from: string, to: string): void {
    const src = this.cluster(from);
    const dst = this.cluster(to);
    const at = src.words.indexOf(word);
    if (at < 0) throw new Error(`word ${word} not in cluster ${from}`);
    src.words.splice(at, 1);
    dst.words.push(word);
    src.dirty.words = true;
    dst.dirty.words = true;
  }

  isDirty(): boolean {
    return this.pairsDirty.size > 0 || this.rows.some(
      (r) => r.dirty.words || r.dirty.rhoSelf || r.dirty.importance);
  }

  markClean(): void {
    this.pairsDirty.clear();
    for (const r of this.rows) {
      r.dirty = { words: false, rhoSelf: false, importance: false };
    }
  }

  validate(): FieldError[] {
    const errors: FieldError[] = [];
    const seen = new Set<string>();
    for (const row of this.rows) {
      if (seen.has(row.name)) {
        errors.push({ field: `cluster:${row.name}:name`,
                      message: "duplicate cluster name" });
      }
      seen.add(row.name);
      if (!(row.rhoSelf >= 0)) {
        errors.push({ field: `cluster:${row.name}:rho_self`,
                      message: "must be nonnegative" });
      }
      if (!(row.importance >= 0)) {
        errors.push({ field: `cluster:${row.name}:importance`,
                      message: "must be nonnegative" });
      }
    }
    const owner = new Map<string, string>();
    for (const row of this.rows) {
      for (const w of row.words) {
        const prev = owner.get(w);
        if (prev !== undefined && prev !== row.name) {
          errors.push({ field: `cluster:${row.name}:words`,
                        message: `word "${w}" already in cluster "${prev}"` });
        }
        owner.set(w, row.name);
      }
    }
    for (const [key, value] of this.pairs) {
      if (!(value >= 0)) {
        errors.push({ field: `pair:${key}`, message: "must be nonnegative" });
      }
      for (const name of key.split("|")) {
        if (!this.rows.some((r) => r.name === name)) {
          errors.push({ field: `pair:${key}`,
                        message: `unknown cluster "${name}"` });
        }
      }
    }
    if (this.defaultCluster !== undefined
        && !this.rows.some((r) => r.name === this.defaultCluster)) {
      errors.push({ field: "spec",
                    message: `default cluster "${this.defaultCluster}" not declared` });
    }
    return errors;
  }
}

/** Renormalize linked weight sliders after setting slot `index` to `value`:
 *  the edited slot keeps its value (clamped to [0, 1]); the others scale
 *  proportionally so the vector sums to 1. */
export function renormalizeWeights(weights: number[], index: number,
                                   value: number): number[] {
  const next = weights.map((w) => Math.max(0, w));
  const v = Math.min(1, Math.max(0, value));
  next[index] = v;
  const others = next.reduce((s, w, i) => (i === index ? s : s + w), 0);
  const remaining = 1 - v;
  for (let i = 0; i < next.length; i++) {
    if (i === index) continue;
    next[i] = others > 0 ? (next[i] / others) * remaining
                         : remaining / (next.length - 1);
  }
  return next;
}
