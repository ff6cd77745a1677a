/**
 * Projection scatterplot: one circle per clustered row, colored by cluster,
 * with optional convex hulls per cluster. Clicking a point toggles it in
 * the shared selection; selected points get the `selected` class.
 */

import { clusterColor } from "./colors.js";
import { ViewState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ScatterData {
  coords: [number, number][];
  labels: number[];
  rowIndices: number[]; // dataset row per point
  rowIds: string[];     // display name per point
}

/** Andrew's monotone chain; returns hull vertices in draw order. */
export function convexHull(points: [number, number][]): [number, number][] {
  const pts = [...points].sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  if (pts.length <= 2) {
    return pts;
  }
  const cross = (o: number[], a: number[], b: number[]) =>
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  const lower: [number, number][] = [];
  for (const p of pts) {
    while (lower.length >= 2 &&
           cross(lower[lower.length - 2], lower[lower.length - 1], p) <= 0) {
      lower.pop();
    }
    lower.push(p);
  }
  const upper: [number, number][] = [];
  for (const p of [...pts].reverse()) {
    while (upper.length >= 2 &&
           cross(upper[upper.length - 2], upper[upper.length - 1], p) <= 0) {
      upper.pop();
    }
    upper.push(p);
  }
  return lower.slice(0, -1).concat(upper.slice(0, -1));
}

export class Scatterplot {
  readonly svg: SVGSVGElement;
  showHulls = true;
  private data: ScatterData | null = null;

  constructor(private root: HTMLElement, private state: ViewState,
              private width = 420, private height = 320) {
    this.svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.svg.setAttribute("class", "scatterplot");
    this.svg.setAttribute("width", String(width));
    this.svg.setAttribute("height", String(height));
    root.appendChild(this.svg);
    state.onSelection(() => this.refreshHighlights());
  }

  render(data: ScatterData): void {
    this.data = data;
    this.svg.textContent = "";
    const xs = data.coords.map((c) => c[0]);
    const ys = data.coords.map((c) => c[1]);
    const pad = 12;
    const xMin = Math.min(...xs), xMax = Math.max(...xs);
    const yMin = Math.min(...ys), yMax = Math.max(...ys);
    const sx = (v: number) => xMax === xMin ? this.width / 2 :
      pad + (v - xMin) / (xMax - xMin) * (this.width - 2 * pad);
    const sy = (v: number) => yMax === yMin ? this.height / 2 :
      this.height - pad - (v - yMin) / (yMax - yMin) * (this.height - 2 * pad);

    if (this.showHulls) {
      const byCluster = new Map<number, [number, number][]>();
      data.labels.forEach((label, i) => {
        if (label < 0) return;
        const list = byCluster.get(label) ?? [];
        list.push([sx(data.coords[i][0]), sy(data.coords[i][1])]);
        byCluster.set(label, list);
      });
      for (const [cluster, pts] of byCluster) {
        if (pts.length < 3) continue;
        const hull = convexHull(pts);
        const poly = document.createElementNS(SVG_NS, "polygon");
        poly.setAttribute("class", "hull");
        poly.setAttribute("points",
                          hull.map((p) => `${p[0]},${p[1]}`).join(" "));
        poly.setAttribute("fill", clusterColor(cluster));
        poly.setAttribute("fill-opacity", "0.12");
        poly.setAttribute("stroke", clusterColor(cluster));
        poly.setAttribute("stroke-opacity", "0.3");
        this.svg.appendChild(poly);
      }
    }

    data.coords.forEach((c, i) => {
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("class", "point");
      circle.setAttribute("cx", String(sx(c[0])));
      circle.setAttribute("cy", String(sy(c[1])));
      circle.setAttribute("r", "4");
      circle.setAttribute("fill", clusterColor(data.labels[i]));
      circle.dataset.row = String(data.rowIndices[i]);
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = `${data.rowIds[i]} (cluster ${data.labels[i]})`;
      circle.appendChild(title);
      circle.addEventListener("click", (ev) => {
        if ((ev as MouseEvent).shiftKey) {
          this.state.toggleRow(data.rowIndices[i], "scatterplot");
        } else {
          this.state.setSelection([data.rowIndices[i]], "scatterplot");
        }
      });
      this.svg.appendChild(circle);
    });
    this.refreshHighlights();
  }

  highlightedRows(): Set<number> {
    const out = new Set<number>();
    this.svg.querySelectorAll("circle.point.selected").forEach((el) => {
      out.add(Number((el as SVGCircleElement).dataset.row));
    });
    return out;
  }

  private refreshHighlights(): void {
    if (!this.data) return;
    const selected = this.state.selectedRows;
    const any = selected.size > 0;
    this.svg.querySelectorAll("circle.point").forEach((el) => {
      const row = Number((el as SVGCircleElement).dataset.row);
      el.classList.toggle("selected", selected.has(row));
      el.classList.toggle("dimmed", any && !selected.has(row));
    });
  }
}
