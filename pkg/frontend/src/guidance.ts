/**
 * Guidance panels: the k-scan line chart with the suggested cluster count,
 * parameter suggestions, and the dynamically filtered validity measures.
 */

import { Api, KScanInfo } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export function kscanChart(scan: KScanInfo, measure: string): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("class", "kscan-chart");
  const width = 260, height = 120, pad = 14;
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  const values = (scan.scores[measure] ?? []).map((v) => v ?? NaN);
  const finite = values.filter((v) => Number.isFinite(v));
  if (!finite.length) {
    return svg;
  }
  const lo = Math.min(...finite), hi = Math.max(...finite);
  const ks = scan.k_values;
  const sx = (k: number) => pad + (k - ks[0]) / Math.max(1, ks[ks.length - 1] - ks[0])
    * (width - 2 * pad);
  const sy = (v: number) => hi === lo ? height / 2 :
    height - pad - (v - lo) / (hi - lo) * (height - 2 * pad);
  const path = document.createElementNS(SVG_NS, "polyline");
  path.setAttribute("fill", "none");
  path.setAttribute("stroke", "#1f77b4");
  path.setAttribute("points", ks.map((k, i) =>
    `${sx(k)},${sy(values[i])}`).join(" "));
  svg.appendChild(path);
  const suggested = scan.suggestions[measure] ?? scan.suggested_k;
  const marker = document.createElementNS(SVG_NS, "circle");
  const idx = ks.indexOf(suggested);
  marker.setAttribute("class", "suggested-k");
  marker.setAttribute("cx", String(sx(suggested)));
  marker.setAttribute("cy", String(sy(values[idx])));
  marker.setAttribute("r", "5");
  marker.setAttribute("fill", "#d62728");
  svg.appendChild(marker);
  return svg;
}

export class GuidancePanel {
  readonly container: HTMLElement;

  constructor(private root: HTMLElement, private api: Api) {
    this.container = document.createElement("div");
    this.container.className = "guidance";
    root.appendChild(this.container);
  }

  async refresh(instanceId: string): Promise<void> {
    this.container.textContent = "";
    const title = document.createElement("h3");
    title.textContent = "Help me decide";
    this.container.appendChild(title);

    const scan = await this.api.kscan(instanceId, 2, 8,
                                      "silhouette,davies_bouldin");
    const scanBlock = document.createElement("div");
    scanBlock.className = "kscan";
    const label = document.createElement("p");
    label.textContent = `Suggested clusters: ${scan.suggested_k} ` +
      `(confidence ${scan.confidence})`;
    scanBlock.appendChild(label);
    scanBlock.appendChild(kscanChart(scan, "silhouette"));
    this.container.appendChild(scanBlock);

    const measures = await this.api.suggest(instanceId, "measures") as
      { measures: string[]; fallback: boolean };
    const measureBlock = document.createElement("p");
    measureBlock.className = "measures";
    measureBlock.textContent = `Suitable measures: ${measures.measures.join(", ")}` +
      (measures.fallback ? " (no measure matches every condition)" : "");
    this.container.appendChild(measureBlock);

    try {
      const metric = await this.api.suggest(instanceId, "metric") as
        { best: string };
      const metricBlock = document.createElement("p");
      metricBlock.className = "metric-suggestion";
      metricBlock.textContent = `Suggested metric: ${metric.best}`;
      this.container.appendChild(metricBlock);
    } catch {
      /* metric suggestion unavailable for this algorithm */
    }
  }
}
