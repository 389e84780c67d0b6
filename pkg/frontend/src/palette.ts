/** Fixed 20-color palette; labels take colors by sorted order, so assignments
 *  survive reloads and do not depend on point order. */
export const PALETTE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
  "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5",
  "#c49c94", "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
] as const;

export const UNLABELED_COLOR = "#444444";

export function labelColors(labels: readonly string[] | null): Map<string, string> {
  const out = new Map<string, string>();
  if (!labels) return out;
  const distinct = [...new Set(labels)].sort();
  distinct.forEach((label, i) => out.set(label, PALETTE[i % PALETTE.length]));
  return out;
}
