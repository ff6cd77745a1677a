/**
 * Tour panel contract: each button issues exactly one step request with
 * the matching feedback payload; the history list grows by one node per
 * generate; requests never overlap (buttons disable while in flight).
 */
import { beforeEach, describe, expect, it, vi } from "vitest";

import { Api, TourNodeInfo } from "../src/api.js";
import { TourPanel } from "../src/tourpanel.js";

interface Captured {
  url: string;
  body: Record<string, unknown>;
}

function makeNode(id: number): TourNodeInfo {
  return {
    node_id: id,
    parent: id - 1,
    feedback: "none",
    params: { k: 3, algorithm: "kmeans", metric: "euclidean",
              feature_subset: [0, 1] },
    k_effective: 3,
    cluster_sizes: [4, 3, 2],
    score: 0.4,
    labels: [0, 0, 1, 1, 2],
    embedding: { method: "pca",
                 coords: [[0, 0], [1, 1], [2, 0], [2, 1], [0, 2]] },
  };
}

describe("tour panel", () => {
  let requests: Captured[];
  let panel: TourPanel;
  let nextId: number;
  let mode: string;
  let resolveStep: (() => void) | null;

  beforeEach(async () => {
    document.body.innerHTML = '<div id="tour"></div>';
    requests = [];
    nextId = 0;
    mode = "explore";
    resolveStep = null;

    vi.stubGlobal("fetch", vi.fn(async (url: string, init?: RequestInit) => {
      const body = init?.body ? JSON.parse(init.body as string) : {};
      if (String(url).includes("/tour/") && String(url).includes("/step")) {
        requests.push({ url: String(url), body });
        if (body.feedback === "like") {
          mode = "refine";
        }
        if (body.feedback === "generate") {
          nextId += 1;
        }
        const payload = {
          tour_id: "t1", mode, current: nextId,
          weights: { k: 0.5, metric: 0.5 },
          node: makeNode(nextId),
        };
        await new Promise<void>((resolve) => {
          resolveStep = resolve;
          queueMicrotask(resolve);
        });
        return new Response(JSON.stringify(payload),
                            { headers: { "content-type": "application/json" } });
      }
      if (String(url).endsWith("/tour")) {
        return new Response(JSON.stringify(
          { tour_id: "t1", mode: "explore", weights: {} }),
          { headers: { "content-type": "application/json" } });
      }
      throw new Error(`unexpected request ${url}`);
    }));

    panel = new TourPanel(document.getElementById("tour")!, new Api());
    await panel.start("v1", 0);
  });

  it("generate issues exactly one step with the generate payload", async () => {
    await panel.step("generate");
    expect(requests).toHaveLength(1);
    expect(requests[0].body).toEqual({ feedback: "generate" });
    expect(requests[0].url).toContain("/api/v1/tour/t1/step");
  });

  it("like and bad send their exact payloads once each", async () => {
    await panel.step("generate");
    await panel.step("like");
    await panel.step("bad");
    expect(requests.map((r) => r.body.feedback))
      .toEqual(["generate", "like", "bad"]);
  });

  it("history grows by one node per generate", async () => {
    expect(panel.historyList.children).toHaveLength(0);
    await panel.step("generate");
    expect(panel.historyList.children).toHaveLength(1);
    await panel.step("generate");
    expect(panel.historyList.children).toHaveLength(2);
    await panel.step("like");
    expect(panel.historyList.children).toHaveLength(2);
    await panel.step("generate");
    expect(panel.historyList.children).toHaveLength(3);
    const ids = [...panel.historyList.children].map(
      (li) => (li as HTMLElement).dataset.nodeId);
    expect(ids).toEqual(["1", "2", "3"]);
  });

  it("buttons disable while a step is in flight", async () => {
    const pending = panel.step("generate");
    expect(panel.generateButton.disabled).toBe(true);
    expect(panel.likeButton.disabled).toBe(true);
    expect(panel.badButton.disabled).toBe(true);
    await pending;
    expect(panel.generateButton.disabled).toBe(false);
  });

  it("clicks during flight do not issue extra requests", async () => {
    const pending = panel.step("generate");
    panel.generateButton.click();
    panel.likeButton.click();
    await pending;
    await Promise.resolve();
    expect(requests).toHaveLength(1);
  });

  it("refine nodes show frozen params in history", async () => {
    await panel.step("generate");
    await panel.step("like");
    await panel.step("generate");
    const last = panel.historyList.lastElementChild as HTMLElement;
    expect(last.querySelector(".locked")).not.toBeNull();
  });

  it("bad marks the disliked node in history", async () => {
    await panel.step("generate");
    const disliked = nextId;
    // server reverts current to the parent on bad
    const prev = nextId - 1;
    vi.mocked(fetch).mockImplementationOnce(async (url, init) => {
      const body = JSON.parse((init?.body as string) ?? "{}");
      requests.push({ url: String(url), body });
      return new Response(JSON.stringify({
        tour_id: "t1", mode: "explore", current: prev, weights: {},
        node: makeNode(prev),
      }), { headers: { "content-type": "application/json" } });
    });
    await panel.step("bad");
    const item = panel.historyList.querySelector(
      `li[data-node-id="${disliked}"]`) as HTMLElement;
    expect(item.classList.contains("disliked")).toBe(true);
  });

  it("constraint toggle shapes the create payload", () => {
    panel.constraintK.checked = true;
    panel.constraintKValue.value = "4";
    expect(panel.constraints()).toEqual({ fixed: { k: 4 } });
  });
});
