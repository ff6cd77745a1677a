/**
 * Cluster-by-feature heatmap. Columns are clusters (largest first), rows
 * the top relevant features; cell color encodes the standardized cluster
 * mean (red high, blue low). Hovering shows the mean and p-value; clicking
 * a column header selects that cluster's rows everywhere.
 */

import { AggregateInfo } from "./api.js";
import { clusterColor, zColor } from "./colors.js";
import { ViewState } from "./state.js";

export interface HeatmapData {
  aggregate: AggregateInfo;
  labels: number[];
  rowIndices: number[];
}

export class Heatmap {
  readonly table: HTMLTableElement;
  private data: HeatmapData | null = null;

  constructor(private root: HTMLElement, private state: ViewState) {
    this.table = document.createElement("table");
    this.table.className = "heatmap";
    root.appendChild(this.table);
    state.onSelection(() => this.refreshHighlights());
  }

  clusterRows(cluster: number): number[] {
    if (!this.data) return [];
    const rows: number[] = [];
    this.data.labels.forEach((label, i) => {
      if (label === cluster) {
        rows.push(this.data!.rowIndices[i]);
      }
    });
    return rows;
  }

  render(data: HeatmapData): void {
    this.data = data;
    this.table.textContent = "";
    const agg = data.aggregate;

    const head = this.table.createTHead().insertRow();
    head.appendChild(document.createElement("th"));
    agg.cluster_order.forEach((cluster, pos) => {
      const th = document.createElement("th");
      th.className = "cluster-column";
      th.dataset.cluster = String(cluster);
      th.textContent = `C${cluster}`;
      const size = document.createElement("span");
      size.className = "cluster-size";
      size.textContent = ` ${agg.cluster_sizes[pos]}`;
      th.appendChild(size);
      th.style.borderBottom = `4px solid ${clusterColor(cluster)}`;
      th.addEventListener("click", () => {
        this.state.setSelection(this.clusterRows(cluster), "heatmap");
      });
      head.appendChild(th);
    });

    const body = this.table.createTBody();
    agg.feature_names.forEach((name, f) => {
      const row = body.insertRow();
      const label = document.createElement("th");
      label.textContent = name;
      const p = agg.feature_p[f];
      label.title = p === null ? name : `${name} (ANOVA p=${p.toExponential(2)})`;
      row.appendChild(label);
      agg.cluster_order.forEach((cluster, pos) => {
        const cell = row.insertCell();
        const info = agg.cells[pos][f];
        cell.className = "cell";
        cell.dataset.cluster = String(cluster);
        cell.style.backgroundColor = zColor(info.z);
        cell.title = `mean ${info.cluster_mean.toFixed(3)}, ` +
          `z ${info.z.toFixed(2)}, ` +
          `p ${info.p_value === null ? "n/a" : info.p_value.toExponential(2)}`;
        cell.addEventListener("click", () => {
          this.state.setSelection(this.clusterRows(cluster), "heatmap");
        });
      });
    });
    this.refreshHighlights();
  }

  private refreshHighlights(): void {
    if (!this.data) return;
    const selected = this.state.selectedRows;
    // a cluster column is highlighted when every one of its rows is selected
    this.table.querySelectorAll("th.cluster-column").forEach((th) => {
      const cluster = Number((th as HTMLElement).dataset.cluster);
      const rows = this.clusterRows(cluster);
      const covered = rows.length > 0 && rows.every((r) => selected.has(r));
      th.classList.toggle("selected", covered);
    });
  }
}
