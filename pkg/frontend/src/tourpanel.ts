/**
 * Tour controls: the three feedback buttons, the history of visited
 * solutions with parameter summaries and thumbnails, and the constraint
 * toggles. One step request is in flight at a time; buttons stay disabled
 * until the current one resolves.
 */

import { Api, TourNodeInfo, TourStepResult } from "./api.js";
import { clusterColor } from "./colors.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface TourCallbacks {
  onNode?: (result: TourStepResult) => void;
  onError?: (err: unknown) => void;
}

function paramsSummary(node: TourNodeInfo): string {
  const p = node.params;
  const extra = p.algorithm === "agglomerative" ? `/${p["linkage"]}` : "";
  const features = (p["feature_subset"] as number[] | undefined)?.length;
  return `#${node.node_id} ${p.algorithm}${extra} k=${node.k_effective}` +
    ` metric=${p["metric"]}` +
    (features !== undefined ? ` features=${features}` : "");
}

function thumbnail(node: TourNodeInfo): SVGSVGElement {
  // client-rendered from the node's cached embedding; empty box without one
  const svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
  svg.setAttribute("class", "thumbnail");
  svg.setAttribute("width", "60");
  svg.setAttribute("height", "44");
  const coords = node.embedding?.coords;
  if (!coords || coords.length === 0) {
    return svg;
  }
  const xs = coords.map((c) => c[0]);
  const ys = coords.map((c) => c[1]);
  const xMin = Math.min(...xs), xMax = Math.max(...xs);
  const yMin = Math.min(...ys), yMax = Math.max(...ys);
  coords.forEach((c, i) => {
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(
      xMax === xMin ? 30 : 3 + (c[0] - xMin) / (xMax - xMin) * 54));
    dot.setAttribute("cy", String(
      yMax === yMin ? 22 : 41 - (c[1] - yMin) / (yMax - yMin) * 38));
    dot.setAttribute("r", "1.5");
    dot.setAttribute("fill", clusterColor(node.labels[i]));
    svg.appendChild(dot);
  });
  return svg;
}

export class TourPanel {
  readonly container: HTMLElement;
  readonly generateButton: HTMLButtonElement;
  readonly likeButton: HTMLButtonElement;
  readonly badButton: HTMLButtonElement;
  readonly historyList: HTMLOListElement;
  readonly modeLabel: HTMLElement;
  readonly constraintK: HTMLInputElement;
  readonly constraintKValue: HTMLInputElement;

  tourId: string | null = null;
  private inFlight = false;

  constructor(private root: HTMLElement, private api: Api,
              private callbacks: TourCallbacks = {}) {
    this.container = document.createElement("div");
    this.container.className = "tour-panel";
    root.appendChild(this.container);

    this.modeLabel = document.createElement("div");
    this.modeLabel.className = "tour-mode";
    this.modeLabel.textContent = "no tour";
    this.container.appendChild(this.modeLabel);

    const controls = document.createElement("div");
    controls.className = "tour-controls";
    this.generateButton = this.button(controls, "generate",
                                      "Generate new solution");
    this.likeButton = this.button(controls, "like", "I like it");
    this.badButton = this.button(controls, "bad", "Very bad");
    this.container.appendChild(controls);

    const constraints = document.createElement("div");
    constraints.className = "tour-constraints";
    const label = document.createElement("label");
    this.constraintK = document.createElement("input");
    this.constraintK.type = "checkbox";
    this.constraintK.className = "fix-k";
    label.appendChild(this.constraintK);
    label.appendChild(document.createTextNode(" fix k = "));
    this.constraintKValue = document.createElement("input");
    this.constraintKValue.type = "number";
    this.constraintKValue.value = "3";
    this.constraintKValue.min = "1";
    label.appendChild(this.constraintKValue);
    constraints.appendChild(label);
    this.container.appendChild(constraints);

    this.historyList = document.createElement("ol");
    this.historyList.className = "tour-history";
    this.container.appendChild(this.historyList);

    this.setEnabled(false);
  }

  private button(parent: HTMLElement, feedback: "generate" | "like" | "bad",
                 text: string): HTMLButtonElement {
    const btn = document.createElement("button");
    btn.className = `tour-${feedback}`;
    btn.textContent = text;
    btn.addEventListener("click", () => void this.step(feedback));
    parent.appendChild(btn);
    return btn;
  }

  constraints(): Record<string, unknown> {
    if (this.constraintK.checked) {
      return { fixed: { k: Number(this.constraintKValue.value) } };
    }
    return {};
  }

  async start(entryInstanceId: string, seed = 0): Promise<void> {
    const res = await this.api.createTour(entryInstanceId, this.constraints(),
                                          seed);
    this.tourId = res.tour_id;
    this.modeLabel.textContent = `tour ${res.tour_id} (${res.mode})`;
    this.historyList.textContent = "";
    this.setEnabled(true);
  }

  private setEnabled(enabled: boolean): void {
    for (const btn of [this.generateButton, this.likeButton, this.badButton]) {
      btn.disabled = !enabled;
    }
  }

  async step(feedback: "generate" | "like" | "bad"): Promise<void> {
    if (!this.tourId || this.inFlight) {
      return;
    }
    this.inFlight = true;
    this.setEnabled(false);
    try {
      const result = await this.api.tourStep(this.tourId, feedback, true);
      this.modeLabel.textContent = `tour ${this.tourId} (${result.mode})`;
      if (feedback === "generate") {
        this.appendHistory(result.node, result.mode);
      } else {
        this.markFeedback(result, feedback);
      }
      this.callbacks.onNode?.(result);
    } catch (err) {
      this.callbacks.onError?.(err);
    } finally {
      this.inFlight = false;
      this.setEnabled(true);
    }
  }

  private appendHistory(node: TourNodeInfo, mode: string): void {
    const item = document.createElement("li");
    item.className = "history-node";
    item.dataset.nodeId = String(node.node_id);
    item.appendChild(thumbnail(node));
    const text = document.createElement("span");
    text.className = "summary";
    text.textContent = paramsSummary(node);
    item.appendChild(text);
    if (mode === "refine") {
      const lock = document.createElement("span");
      lock.className = "locked";
      lock.title = "features and cluster count frozen to the liked solution";
      lock.textContent = " \u{1F512} features,k";
      item.appendChild(lock);
    }
    this.historyList.appendChild(item);
  }

  private markFeedback(result: TourStepResult, feedback: "like" | "bad"): void {
    const id = feedback === "like" ? result.current : undefined;
    if (feedback === "like" && id !== undefined) {
      const item = this.historyList.querySelector(
        `li[data-node-id="${id}"]`);
      item?.classList.add("liked");
    }
    if (feedback === "bad") {
      // the disliked node is the last one marked in history; current moved
      // back to its parent
      const items = this.historyList.querySelectorAll("li.history-node");
      for (let i = items.length - 1; i >= 0; i--) {
        const item = items[i] as HTMLElement;
        if (!item.classList.contains("disliked") &&
            Number(item.dataset.nodeId) !== result.current) {
          item.classList.add("disliked");
          break;
        }
      }
    }
  }
}
