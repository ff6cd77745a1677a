/**
 * Application shell: dataset upload, clustering-view assembly (scatterplot
 * + heatmap + slider), data table, guidance, cluster details and the tour
 * panel, all wired through the shared selection state.
 */

import { Api, DatasetDetail, InstanceInfo } from "./api.js";
import { ClusterDetails } from "./details.js";
import { DataTable } from "./datatable.js";
import { GuidancePanel } from "./guidance.js";
import { Heatmap } from "./heatmap.js";
import { Scatterplot } from "./scatterplot.js";
import { TourPanel } from "./tourpanel.js";
import { ViewState } from "./state.js";

export class App {
  readonly state = new ViewState();
  readonly api = new Api();

  private dataset: DatasetDetail | null = null;
  private instance: InstanceInfo | null = null;

  private scatter!: Scatterplot;
  private heatmap!: Heatmap;
  private table!: DataTable;
  private tour!: TourPanel;
  private guidance!: GuidancePanel;
  private details!: ClusterDetails;
  private status!: HTMLElement;
  private slider!: HTMLInputElement;
  private methodSelect!: HTMLSelectElement;

  constructor(private root: HTMLElement) {
    this.buildLayout();
  }

  private buildLayout(): void {
    this.root.innerHTML = `
      <header>
        <h1>clusterscout</h1>
        <input type="file" id="csv-upload" accept=".csv">
        <span id="status"></span>
      </header>
      <main>
        <section id="table-region"></section>
        <section id="clustering-view">
          <div id="view-controls">
            <label>projection
              <select id="projection-method">
                <option value="auto">auto</option>
                <option value="pca" selected>pca</option>
                <option value="cmds">cmds</option>
                <option value="tsne">tsne</option>
              </select>
            </label>
            <label>clusters <span id="k-label">3</span>
              <input type="range" id="k-slider" min="2" max="8" value="3">
            </label>
          </div>
          <div id="scatter-region"></div>
          <div id="heatmap-region"></div>
          <div id="guidance-region"></div>
        </section>
        <aside id="tour-region"></aside>
      </main>`;
    this.status = this.root.querySelector("#status")!;
    this.slider = this.root.querySelector("#k-slider")!;
    this.methodSelect = this.root.querySelector("#projection-method")!;

    this.scatter = new Scatterplot(
      this.root.querySelector("#scatter-region")!, this.state);
    this.heatmap = new Heatmap(
      this.root.querySelector("#heatmap-region")!, this.state);
    this.table = new DataTable(
      this.root.querySelector("#table-region")!, this.state, this.api);
    this.guidance = new GuidancePanel(
      this.root.querySelector("#guidance-region")!, this.api);
    this.details = new ClusterDetails(this.root, this.api);
    this.tour = new TourPanel(this.root.querySelector("#tour-region")!,
                              this.api, {
        onNode: () => void this.refreshFromTour(),
        onError: (err) => this.report(err),
      });

    const upload = this.root.querySelector("#csv-upload") as HTMLInputElement;
    upload.addEventListener("change", () => {
      const file = upload.files?.[0];
      if (file) {
        void this.loadFile(file);
      }
    });
    this.slider.addEventListener("change", () => {
      void this.setK(Number(this.slider.value));
    });
    this.methodSelect.addEventListener("change", () => {
      void this.renderViews();
    });
    this.table.onFeatureToggle = (enabled) => {
      void this.recluster({ features: enabled });
    };
    this.heatmap.table.addEventListener("dblclick", (ev) => {
      const cell = (ev.target as HTMLElement).closest("[data-cluster]");
      if (cell && this.dataset && this.instance) {
        void this.openDetails(Number((cell as HTMLElement).dataset.cluster));
      }
    });
  }

  private report(err: unknown): void {
    this.status.textContent = err instanceof Error ? err.message : String(err);
  }

  private async loadFile(file: File): Promise<void> {
    try {
      const summary = await this.api.uploadDataset(file);
      this.status.textContent =
        `${summary.rows} rows, ${summary.features} features` +
        (summary.dropped_rows ? `, ${summary.dropped_rows} dropped` : "") +
        (summary.sampling.recommended
          ? ` — large dataset: sampling at rate ${summary.sampling.suggested_rate} suggested`
          : "");
      this.dataset = await this.api.datasetDetail(summary.dataset_id);
      const sampleRate = summary.sampling.recommended
        ? summary.sampling.suggested_rate : 1.0;
      this.instance = await this.api.createInstance(summary.dataset_id, {
        algorithm: "kmeans", k: Number(this.slider.value),
        sample_rate: sampleRate, seed: 0,
      });
      this.state.activeInstanceId = this.instance.instance_id;
      await this.api.precompute(this.instance.instance_id, 2, 8);
      await this.table.setData(this.dataset, this.instance);
      await this.renderViews();
      await this.guidance.refresh(this.instance.instance_id);
      await this.tour.start(this.instance.instance_id);
    } catch (err) {
      this.report(err);
    }
  }

  private async setK(k: number): Promise<void> {
    this.root.querySelector("#k-label")!.textContent = String(k);
    await this.recluster({ k });
  }

  private async recluster(patch: Record<string, unknown>): Promise<void> {
    if (!this.instance) return;
    try {
      this.instance = await this.api.patchParams(this.instance.instance_id,
                                                 patch);
      await this.table.setData(this.dataset!, this.instance);
      await this.renderViews();
    } catch (err) {
      this.report(err);
    }
  }

  private async renderViews(): Promise<void> {
    if (!this.dataset || !this.instance) return;
    const method = this.methodSelect.value;
    const emb = await this.api.embedding(this.instance.instance_id, method);
    this.scatter.render({
      coords: emb.coords,
      labels: this.instance.labels,
      rowIndices: this.instance.row_indices,
      rowIds: this.instance.row_indices.map((r) => this.dataset!.row_ids[r]),
    });
    const aggregate = await this.api.aggregate(this.instance.instance_id, 12);
    this.heatmap.render({
      aggregate,
      labels: this.instance.labels,
      rowIndices: this.instance.row_indices,
    });
  }

  private async refreshFromTour(): Promise<void> {
    if (!this.tour.tourId) return;
    // adopting a tour node happens through accept; just surface the mode
  }

  async openDetails(cluster: number): Promise<void> {
    if (!this.dataset || !this.instance) return;
    const aggregate = await this.api.aggregate(this.instance.instance_id);
    await this.details.show(this.dataset, this.instance, aggregate, cluster);
  }
}

export function mount(root: HTMLElement): App {
  return new App(root);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document.getElementById("app")!);
}
