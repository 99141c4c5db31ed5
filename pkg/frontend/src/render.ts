/**
 * Drawing for the three panels.
 *
 * The pure helpers map service geometry (cell units, band tables) to
 * canvas or chart coordinates; every physical quantity they touch was
 * computed server-side. The DOM painters at the bottom are thin layers
 * over those helpers.
 */

import type { BandRow, CandidateDoc, LayoutDoc, LayoutLink } from "./api.js";
import type { HistoryEntry } from "./state.js";

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface TileRect {
  tile: [number, number];
  rect: Rect;
}

function bandFor(bands: BandRow[], kind: string, index: number): BandRow {
  for (const b of bands) {
    if (b[0] === kind && b[1] === index) return b;
  }
  throw new Error(`no ${kind} band with index ${index}`);
}

/** Tile blocks in cell units: x spans columns, y spans rows. */
export function tileRects(layout: LayoutDoc): TileRect[] {
  const out: TileRect[] = [];
  for (let r = 0; r < layout.dims.rows; r++) {
    const rb = bandFor(layout.row_bands, "tile", r);
    for (let c = 0; c < layout.dims.cols; c++) {
      const cb = bandFor(layout.col_bands, "tile", c);
      out.push({
        tile: [r, c],
        rect: { x: cb[2], y: rb[2], w: cb[3], h: rb[3] },
      });
    }
  }
  return out;
}

/** Center of a tile block in cell units, as [row, col]. */
export function tileCenter(layout: LayoutDoc, tile: [number, number]): [number, number] {
  const rb = bandFor(layout.row_bands, "tile", tile[0]);
  const cb = bandFor(layout.col_bands, "tile", tile[1]);
  return [rb[2] + rb[3] / 2, cb[2] + cb[3] / 2];
}

/**
 * Waypoints of one link in cell units: endpoint tile centers joined
 * through the centers of the routed corner cells.
 */
export function linkPolyline(layout: LayoutDoc, link: LayoutLink): [number, number][] {
  const pts: [number, number][] = [tileCenter(layout, link.a)];
  for (const [r, c] of link.points) pts.push([r + 0.5, c + 0.5]);
  pts.push(tileCenter(layout, link.b));
  return pts;
}

/**
 * Pixel sizes of one cell so the whole grid fits the box while keeping
 * the physical aspect ratio the service reported.
 */
export function fitScale(
  layout: LayoutDoc,
  maxWidthPx: number,
  maxHeightPx: number,
): { pxWidth: number; pxHeight: number } {
  const aspect = layout.cell_mm.width / layout.cell_mm.height;
  const s = Math.min(
    maxWidthPx / (layout.n_cols * aspect),
    maxHeightPx / layout.n_rows,
  );
  return { pxWidth: s * aspect, pxHeight: s };
}

/** Distance from a point to one segment, all in the same units. */
export function distToSegment(
  p: [number, number],
  a: [number, number],
  b: [number, number],
): number {
  const dx = b[0] - a[0];
  const dy = b[1] - a[1];
  const len2 = dx * dx + dy * dy;
  let t = 0;
  if (len2 > 0) {
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2;
    t = Math.max(0, Math.min(1, t));
  }
  const qx = a[0] + t * dx;
  const qy = a[1] + t * dy;
  return Math.hypot(p[0] - qx, p[1] - qy);
}

export interface ScatterPoint {
  index: number;
  x: number;
  y: number;
  radius: number;
  onFront: boolean;
}

/**
 * Scatter coordinates for the history: x is area overhead, y is
 * saturation throughput, both normalized to [0, 1] over the data, and
 * the dot radius encodes zero-load latency (lower latency, larger dot).
 */
export function scatterPoints(
  cands: CandidateDoc[],
  marks: boolean[],
  minRadius = 3,
  maxRadius = 9,
): ScatterPoint[] {
  const rows: { index: number; ov: number; sat: number; zl: number }[] = [];
  for (let i = 0; i < cands.length; i++) {
    const c = cands[i];
    if (c.cost === null || c.perf === null) continue;
    rows.push({
      index: i,
      ov: c.cost.area_overhead,
      sat: c.perf.saturation_throughput,
      zl: c.perf.zero_load_latency_cycles,
    });
  }
  if (rows.length === 0) return [];
  const norm = (v: number, lo: number, hi: number) =>
    hi > lo ? (v - lo) / (hi - lo) : 0.5;
  const ovs = rows.map((r) => r.ov);
  const sats = rows.map((r) => r.sat);
  const zls = rows.map((r) => r.zl);
  const [ovLo, ovHi] = [Math.min(...ovs), Math.max(...ovs)];
  const [satLo, satHi] = [Math.min(...sats), Math.max(...sats)];
  const [zlLo, zlHi] = [Math.min(...zls), Math.max(...zls)];
  return rows.map((r) => ({
    index: r.index,
    x: norm(r.ov, ovLo, ovHi),
    y: norm(r.sat, satLo, satHi),
    radius: maxRadius - (maxRadius - minRadius) * norm(r.zl, zlLo, zlHi),
    onFront: marks[r.index],
  }));
}

// ------------------------------------------------------------ DOM painters

export const KIND_COLORS: Record<string, string> = {
  mesh: "#7a8ca3",
  row_skip: "#e08f3c",
  col_skip: "#4ca66b",
  wraparound: "#9a6dd7",
  hypercube_dim: "#3aa6b9",
};

export interface LinkHit {
  pointsPx: [number, number][];
  label: string;
}

/** Paint the floorplan and return hover targets in canvas pixels. */
export function drawFloorplan(canvas: HTMLCanvasElement, layout: LayoutDoc): LinkHit[] {
  const ctx = canvas.getContext("2d");
  if (!ctx) return [];
  const { pxWidth, pxHeight } = fitScale(layout, canvas.width - 8, canvas.height - 8);
  const toPx = (r: number, c: number): [number, number] =>
    [4 + c * pxWidth, 4 + r * pxHeight];

  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#1d2430";
  for (const t of tileRects(layout)) {
    const [x, y] = toPx(t.rect.y, t.rect.x);
    ctx.fillRect(x, y, t.rect.w * pxWidth, t.rect.h * pxHeight);
  }

  const hits: LinkHit[] = [];
  ctx.lineWidth = 1.5;
  for (const link of layout.links) {
    const pts = linkPolyline(layout, link).map(([r, c]) => toPx(r, c));
    ctx.strokeStyle = KIND_COLORS[link.kind] ?? "#c0c0c0";
    ctx.beginPath();
    ctx.moveTo(pts[0][0], pts[0][1]);
    for (const [x, y] of pts.slice(1)) ctx.lineTo(x, y);
    ctx.stroke();
    hits.push({
      pointsPx: pts,
      label: `(${link.a}) to (${link.b}) ${link.kind}: `
        + `${link.latency_cycles} cyc, ${link.length_mm.toFixed(3)} mm`,
    });
  }
  return hits;
}

/** Nearest link label within the pick radius, or null. */
export function pickLink(hits: LinkHit[], x: number, y: number, radiusPx = 5): string | null {
  let best: { d: number; label: string } | null = null;
  for (const h of hits) {
    for (let i = 1; i < h.pointsPx.length; i++) {
      const d = distToSegment([x, y], h.pointsPx[i - 1], h.pointsPx[i]);
      if (d <= radiusPx && (best === null || d < best.d)) {
        best = { d, label: h.label };
      }
    }
  }
  return best ? best.label : null;
}

const METRIC_ORDER = [
  "a_tot_mm2", "a_nonoc_mm2", "area_overhead",
  "p_tot_w", "p_nonoc_w", "p_noc_w",
  "zero_load_latency_cycles", "saturation_throughput", "analytic_bound",
];

/**
 * Fill the metrics list with the service's display strings, verbatim.
 * Returns the element count so callers can detect an empty report.
 */
export function renderMetrics(container: HTMLElement, entry: HistoryEntry): number {
  container.textContent = "";
  let n = 0;
  for (const key of METRIC_ORDER) {
    const value = entry.display[key];
    if (value === undefined) continue;
    const dt = document.createElement("dt");
    dt.textContent = key;
    const dd = document.createElement("dd");
    dd.textContent = value;
    container.append(dt, dd);
    n++;
  }
  return n;
}

/** Budget gauge: bar width tracks overhead, red past the budget. */
export function renderBudget(bar: HTMLElement, overhead: number | null, budget: number): void {
  if (overhead === null) {
    bar.style.width = "0%";
    bar.classList.remove("over");
    return;
  }
  bar.style.width = `${Math.min(100, (overhead / budget) * 100).toFixed(1)}%`;
  bar.classList.toggle("over", overhead > budget);
}

/** Scatter the history into an SVG element; front points highlighted. */
export function renderPareto(
  svg: SVGSVGElement,
  entries: readonly HistoryEntry[],
  marks: boolean[],
  onPick?: (index: number) => void,
): void {
  const W = svg.viewBox.baseVal.width || 260;
  const H = svg.viewBox.baseVal.height || 200;
  const pad = 14;
  svg.textContent = "";
  const pts = scatterPoints(entries.map((e) => e.candidate), marks);
  for (const p of pts) {
    const el = document.createElementNS("http://www.w3.org/2000/svg", "circle");
    el.setAttribute("cx", (pad + p.x * (W - 2 * pad)).toFixed(1));
    el.setAttribute("cy", (H - pad - p.y * (H - 2 * pad)).toFixed(1));
    el.setAttribute("r", p.radius.toFixed(1));
    el.setAttribute("class", p.onFront ? "pt front" : "pt");
    const e = entries[p.index];
    const title = document.createElementNS("http://www.w3.org/2000/svg", "title");
    title.textContent = `s_r=[${e.spec.s_r}] s_c=[${e.spec.s_c}]`
      + ` ov=${e.display["area_overhead"] ?? "?"}`
      + ` sat=${e.display["saturation_throughput"] ?? "?"}`
      + ` zl=${e.display["zero_load_latency_cycles"] ?? "?"}`;
    el.append(title);
    if (onPick) el.addEventListener("click", () => onPick(p.index));
    svg.append(el);
  }
}
