/**
 * Raw-data table: a color band per row shows the assigned cluster, green
 * and red arrows flag high/low outliers, columns sort on click, a filter
 * box narrows the selection through the filter endpoint, and per-feature
 * popovers show histogram + statistics for the selection vs the dataset.
 */

import { Api, DatasetDetail, FeatureStat, InstanceInfo } from "./api.js";
import { clusterColor } from "./colors.js";
import { ViewState } from "./state.js";

export class DataTable {
  readonly container: HTMLElement;
  readonly filterInput: HTMLInputElement;
  readonly filterError: HTMLElement;
  readonly table: HTMLTableElement;
  readonly statsPanel: HTMLElement;
  onFeatureToggle: ((enabled: number[]) => void) | null = null;

  private dataset: DatasetDetail | null = null;
  private instance: InstanceInfo | null = null;
  private outlierFlags = new Map<number, string[]>();
  private sortBy: { feature: number; asc: boolean } | null = null;
  private enabled = new Set<number>();

  constructor(private root: HTMLElement, private state: ViewState,
              private api: Api) {
    this.container = document.createElement("div");
    this.container.className = "datatable";
    root.appendChild(this.container);

    const bar = document.createElement("div");
    bar.className = "filter-bar";
    this.filterInput = document.createElement("input");
    this.filterInput.type = "text";
    this.filterInput.placeholder =
      "filter rows, e.g. age > 40 & weight < 180, or search text";
    this.filterInput.addEventListener("change", () => this.applyFilter());
    bar.appendChild(this.filterInput);
    this.filterError = document.createElement("span");
    this.filterError.className = "filter-error";
    bar.appendChild(this.filterError);
    this.container.appendChild(bar);

    this.table = document.createElement("table");
    this.table.className = "data";
    this.container.appendChild(this.table);

    this.statsPanel = document.createElement("div");
    this.statsPanel.className = "stats-popover hidden";
    this.container.appendChild(this.statsPanel);

    state.onSelection(() => this.refreshHighlights());
  }

  async setData(dataset: DatasetDetail, instance: InstanceInfo | null):
      Promise<void> {
    this.dataset = dataset;
    this.instance = instance;
    this.enabled = new Set(dataset.enabled_features);
    this.outlierFlags.clear();
    for (const f of dataset.enabled_features) {
      const res = await this.api.outliers(dataset.dataset_id, f);
      this.outlierFlags.set(f, res.flags);
    }
    this.renderTable();
  }

  private clusterOf(row: number): number | null {
    if (!this.instance) return null;
    const pos = this.instance.row_indices.indexOf(row);
    return pos === -1 ? null : this.instance.labels[pos];
  }

  private rowOrder(): number[] {
    const ds = this.dataset!;
    const rows = ds.row_ids.map((_, i) => i);
    if (this.sortBy !== null) {
      const { feature, asc } = this.sortBy;
      rows.sort((a, b) => (ds.values[a][feature] - ds.values[b][feature])
                          * (asc ? 1 : -1));
    }
    return rows;
  }

  private renderTable(): void {
    const ds = this.dataset;
    if (!ds) return;
    this.table.textContent = "";
    const head = this.table.createTHead().insertRow();
    head.appendChild(document.createElement("th")); // band column
    const idHead = document.createElement("th");
    idHead.textContent = "id";
    head.appendChild(idHead);
    ds.feature_names.forEach((name, f) => {
      const th = document.createElement("th");
      th.dataset.feature = String(f);
      const toggle = document.createElement("input");
      toggle.type = "checkbox";
      toggle.className = "feature-toggle";
      toggle.checked = this.enabled.has(f);
      toggle.addEventListener("change", () => {
        if (toggle.checked) {
          this.enabled.add(f);
        } else {
          this.enabled.delete(f);
        }
        this.onFeatureToggle?.([...this.enabled].sort((a, b) => a - b));
      });
      th.appendChild(toggle);
      const sorter = document.createElement("button");
      sorter.className = "sort";
      sorter.textContent = name;
      sorter.addEventListener("click", () => {
        const asc = this.sortBy?.feature === f ? !this.sortBy.asc : true;
        this.sortBy = { feature: f, asc };
        this.renderTable();
      });
      th.appendChild(sorter);
      const statsBtn = document.createElement("button");
      statsBtn.className = "stats";
      statsBtn.textContent = "≡";
      statsBtn.title = `statistics for ${name}`;
      statsBtn.addEventListener("click", () => void this.showStats(f));
      th.appendChild(statsBtn);
      head.appendChild(th);
    });

    const body = this.table.createTBody();
    for (const r of this.rowOrder()) {
      const tr = body.insertRow();
      tr.dataset.row = String(r);
      const band = tr.insertCell();
      band.className = "band";
      const cluster = this.clusterOf(r);
      band.style.backgroundColor =
        cluster === null ? "transparent" : clusterColor(cluster);
      band.title = cluster === null ? "" : `cluster ${cluster}`;
      const idCell = tr.insertCell();
      idCell.textContent = ds.row_ids[r];
      ds.feature_names.forEach((_, f) => {
        const cell = tr.insertCell();
        const flag = this.outlierFlags.get(f)?.[r] ?? "none";
        const value = ds.values[r][f];
        cell.textContent = Number.isInteger(value) ? String(value)
          : value.toPrecision(4);
        if (flag === "high") {
          cell.classList.add("outlier-high");
          cell.textContent += " ↑";
        } else if (flag === "low") {
          cell.classList.add("outlier-low");
          cell.textContent += " ↓";
        }
      });
      tr.addEventListener("click", (ev) => {
        if ((ev as MouseEvent).shiftKey) {
          this.state.toggleRow(r, "table");
        } else {
          this.state.setSelection([r], "table");
        }
      });
    }
    this.refreshHighlights();
  }

  highlightedRows(): Set<number> {
    const out = new Set<number>();
    this.table.querySelectorAll("tbody tr.selected").forEach((tr) => {
      out.add(Number((tr as HTMLElement).dataset.row));
    });
    return out;
  }

  private refreshHighlights(): void {
    const selected = this.state.selectedRows;
    this.table.querySelectorAll("tbody tr").forEach((tr) => {
      const row = Number((tr as HTMLElement).dataset.row);
      tr.classList.toggle("selected", selected.has(row));
    });
  }

  private async applyFilter(): Promise<void> {
    if (!this.dataset) return;
    const text = this.filterInput.value.trim();
    this.filterError.textContent = "";
    if (!text) {
      this.state.clearSelection("table");
      return;
    }
    try {
      const res = await this.api.filter(this.dataset.dataset_id, text);
      this.state.setSelection(res.row_indices, "table");
    } catch (err) {
      const e = err as { message?: string; pos?: number };
      const caret = e.pos !== undefined ?
        `\n${" ".repeat(e.pos)}^` : "";
      this.filterError.textContent = `${e.message ?? "filter error"}${caret}`;
    }
  }

  private async showStats(feature: number): Promise<void> {
    if (!this.dataset) return;
    const whole = await this.api.stats(this.dataset.dataset_id);
    const selection = [...this.state.selectedRows];
    const sel = selection.length
      ? await this.api.stats(this.dataset.dataset_id, selection)
      : null;
    const find = (list: FeatureStat[]) =>
      list.find((s) => s.feature === feature)!;
    this.statsPanel.classList.remove("hidden");
    this.statsPanel.textContent = "";
    const title = document.createElement("h4");
    title.textContent = this.dataset.feature_names[feature];
    this.statsPanel.appendChild(title);
    const render = (stat: FeatureStat, klass: string, label: string) => {
      const block = document.createElement("div");
      block.className = `stat-block ${klass}`;
      block.innerHTML =
        `<strong>${label}</strong> ` +
        `mean ${stat.mean.toFixed(3)}, std ${stat.std.toFixed(3)}, ` +
        `median ${stat.median.toFixed(3)}, ` +
        `q1 ${stat.q1.toFixed(3)}, q3 ${stat.q3.toFixed(3)}`;
      const histo = document.createElement("div");
      histo.className = "histogram";
      const peak = Math.max(...stat.histogram, 1);
      for (const count of stat.histogram) {
        const bar = document.createElement("span");
        bar.className = "bar";
        bar.style.height = `${(count / peak) * 40}px`;
        histo.appendChild(bar);
      }
      block.appendChild(histo);
      this.statsPanel.appendChild(block);
    };
    render(find(whole.stats), "whole", "dataset");
    if (sel) {
      render(find(sel.stats), "selection", "selection");
    }
  }
}
