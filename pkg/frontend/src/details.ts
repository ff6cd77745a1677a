/**
 * Cluster Details modal: automatic description, rename box, member table
 * and per-feature statistics, all assembled from the aggregate, stats and
 * instance endpoints (no bespoke server calls).
 */

import { Api, AggregateInfo, DatasetDetail, InstanceInfo } from "./api.js";
import { clusterColor } from "./colors.js";

export class ClusterDetails {
  readonly overlay: HTMLElement;

  constructor(private root: HTMLElement, private api: Api) {
    this.overlay = document.createElement("div");
    this.overlay.className = "modal-overlay hidden";
    this.overlay.addEventListener("click", (ev) => {
      if (ev.target === this.overlay) {
        this.hide();
      }
    });
    root.appendChild(this.overlay);
  }

  hide(): void {
    this.overlay.classList.add("hidden");
    this.overlay.textContent = "";
  }

  async show(dataset: DatasetDetail, instance: InstanceInfo,
             aggregate: AggregateInfo, cluster: number): Promise<void> {
    this.overlay.textContent = "";
    this.overlay.classList.remove("hidden");
    const modal = document.createElement("div");
    modal.className = "modal cluster-details";
    this.overlay.appendChild(modal);

    const header = document.createElement("h3");
    header.style.borderLeft = `8px solid ${clusterColor(cluster)}`;
    const nameInput = document.createElement("input");
    nameInput.type = "text";
    nameInput.value = instance.cluster_names[String(cluster)] ?? `C${cluster}`;
    nameInput.addEventListener("change", () => {
      void this.api.nameCluster(instance.instance_id, cluster,
                                nameInput.value || null);
    });
    header.appendChild(nameInput);
    modal.appendChild(header);

    const description = document.createElement("p");
    description.className = "description";
    const pos = aggregate.cluster_order.indexOf(cluster);
    description.textContent = aggregate.descriptions[pos];
    modal.appendChild(description);

    const members = document.createElement("table");
    members.className = "members";
    const head = members.createTHead().insertRow();
    for (const title of ["id", ...dataset.feature_names]) {
      const th = document.createElement("th");
      th.textContent = title;
      head.appendChild(th);
    }
    const body = members.createTBody();
    instance.labels.forEach((label, i) => {
      if (label !== cluster) return;
      const row = body.insertRow();
      const r = instance.row_indices[i];
      row.insertCell().textContent = dataset.row_ids[r];
      for (const value of dataset.values[r]) {
        row.insertCell().textContent = value.toPrecision(4);
      }
    });
    modal.appendChild(members);

    const close = document.createElement("button");
    close.className = "close";
    close.textContent = "Close";
    close.addEventListener("click", () => this.hide());
    modal.appendChild(close);
  }
}
