import { UNLABELED_COLOR, labelColors } from "./palette.js";
import type { EmbeddingResponse } from "./types.js";

export interface ScatterPoint {
  id: string;
  x: number;
  y: number;
  label: string | null;
  color: string;
}

export interface Viewport {
  /** data coordinates of the view center */
  cx: number;
  cy: number;
  /** data units visible across the larger screen dimension, before zoom */
  span: number;
  zoom: number;
}

/**
 * Scatter state: served points plus zoom/pan. All coordinates come from the
 * server; this class only maps them to and from screen space.
 */
export class ScatterViewModel {
  points: ScatterPoint[];
  view: Viewport;
  hovered: ScatterPoint | null = null;
  revision: number;

  constructor(points: ScatterPoint[], revision: number) {
    this.points = points;
    this.revision = revision;
    this.view = ScatterViewModel.fitView(points);
  }

  static fromEmbedding(resp: EmbeddingResponse): ScatterViewModel {
    const colors = labelColors(resp.labels);
    const points = resp.ids.map((id, i) => {
      const label = resp.labels ? resp.labels[i] : null;
      return {
        id,
        x: resp.points[i][0],
        y: resp.points[i][1],
        label,
        color: label !== null ? colors.get(label) ?? UNLABELED_COLOR
                              : UNLABELED_COLOR,
      };
    });
    return new ScatterViewModel(points, resp.revision);
  }

  static fitView(points: ScatterPoint[]): Viewport {
    if (points.length === 0) return { cx: 0, cy: 0, span: 2, zoom: 1 };
    let xmin = Infinity, xmax = -Infinity, ymin = Infinity, ymax = -Infinity;
    for (const p of points) {
      xmin = Math.min(xmin, p.x);
      xmax = Math.max(xmax, p.x);
      ymin = Math.min(ymin, p.y);
      ymax = Math.max(ymax, p.y);
    }
    const span = Math.max(xmax - xmin, ymax - ymin) || 2;
    return { cx: (xmin + xmax) / 2, cy: (ymin + ymax) / 2,
             span: span * 1.1, zoom: 1 };
  }

  /** data units per pixel at the current zoom */
  scale(width: number, height: number): number {
    return this.view.span / (Math.max(width, height) * this.view.zoom);
  }

  toScreen(x: number, y: number, width: number, height: number): [number, number] {
    const s = this.scale(width, height);
    return [width / 2 + (x - this.view.cx) / s,
            height / 2 - (y - this.view.cy) / s];
  }

  toData(sx: number, sy: number, width: number, height: number): [number, number] {
    const s = this.scale(width, height);
    return [this.view.cx + (sx - width / 2) * s,
            this.view.cy - (sy - height / 2) * s];
  }

  /** zoom by `factor` keeping the data point under the cursor fixed */
  zoomAt(factor: number, sx: number, sy: number, width: number, height: number): void {
    const [dx, dy] = this.toData(sx, sy, width, height);
    this.view.zoom = Math.min(200, Math.max(0.05, this.view.zoom * factor));
    const [nx, ny] = this.toData(sx, sy, width, height);
    this.view.cx += dx - nx;
    this.view.cy += dy - ny;
  }

  panByPixels(dxPx: number, dyPx: number, width: number, height: number): void {
    const s = this.scale(width, height);
    this.view.cx -= dxPx * s;
    this.view.cy += dyPx * s;
  }

  /** nearest point within `radiusPx` of the cursor, or null */
  hitTest(sx: number, sy: number, width: number, height: number,
          radiusPx = 6): ScatterPoint | null {
    let best: ScatterPoint | null = null;
    let bestSq = radiusPx * radiusPx;
    for (const p of this.points) {
      const [px, py] = this.toScreen(p.x, p.y, width, height);
      const d = (px - sx) * (px - sx) + (py - sy) * (py - sy);
      if (d <= bestSq) {
        best = p;
        bestSq = d;
      }
    }
    return best;
  }
}
