/**
 * Typed client for the clustering service JSON API. Every call goes through
 * the documented /api/v1 endpoints; errors surface as ApiError with the
 * server-reported type and message.
 */

const BASE = "/api/v1";

export class ApiError extends Error {
  constructor(public status: number, public kind: string, message: string,
              public pos?: number) {
    super(message);
  }
}

async function handle<T>(res: Response): Promise<T> {
  if (res.ok) {
    return (await res.json()) as T;
  }
  let kind = "HttpError";
  let message = `${res.status}`;
  let pos: number | undefined;
  try {
    const body = await res.json();
    kind = body.error?.type ?? kind;
    message = body.error?.message ?? message;
    pos = body.error?.pos;
  } catch {
    /* non-JSON error body */
  }
  throw new ApiError(res.status, kind, message, pos);
}

async function getJson<T>(path: string): Promise<T> {
  return handle<T>(await fetch(`${BASE}${path}`));
}

async function postJson<T>(path: string, body: unknown): Promise<T> {
  return handle<T>(await fetch(`${BASE}${path}`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  }));
}

export interface DatasetSummary {
  dataset_id: string;
  rows: number;
  features: number;
  feature_names: string[];
  dropped_rows: number;
  sampling: { recommended: boolean; suggested_rate: number };
}

export interface DatasetDetail extends DatasetSummary {
  row_ids: string[];
  values: number[][];
  enabled_features: number[];
}

export interface FeatureStat {
  feature: number;
  name: string;
  mean: number; std: number; min: number; max: number;
  q1: number; median: number; q3: number;
  histogram: number[];
  bin_edges: number[];
  skewness: number;
}

export interface ClusteringParamsBody {
  algorithm?: string;
  metric?: string;
  linkage?: string;
  k?: number;
  eps?: number;
  min_pts?: number;
  features?: number[];
  sample_rate?: number;
  seed?: number;
  standardize?: boolean;
}

export interface InstanceInfo {
  instance_id: string;
  dataset_id: string;
  params: Record<string, unknown> & { k: number; algorithm: string };
  labels: number[];
  k_effective: number;
  row_indices: number[];
  cluster_sizes: number[];
  cluster_names: Record<string, string>;
  score: number;
}

export interface AggregateCellInfo {
  cluster_mean: number;
  z: number;
  p_value: number | null;
}

export interface AggregateInfo {
  cluster_order: number[];
  cluster_sizes: number[];
  feature_order: number[];
  feature_names: string[];
  feature_p: (number | null)[];
  cells: AggregateCellInfo[][];
  descriptions: string[];
}

export interface EmbeddingInfo {
  method: string;
  coords: [number, number][];
  scores?: Record<string, number>;
}

export interface KScanInfo {
  k_values: number[];
  scores: Record<string, (number | null)[]>;
  inertia: number[];
  suggestions: Record<string, number>;
  suggested_k: number;
  confidence: "high" | "low";
}

export interface TourNodeInfo {
  node_id: number;
  parent: number | null;
  feedback: string;
  params: Record<string, unknown> & { k: number; algorithm: string };
  k_effective: number;
  cluster_sizes: number[];
  score: number;
  labels: number[];
  embedding?: { method: string; coords: [number, number][] };
}

export interface TourStepResult {
  tour_id: string;
  mode: string;
  current: number;
  weights: Record<string, number>;
  node: TourNodeInfo;
}

export interface TourHistory {
  tour_id: string;
  mode: string;
  current: number;
  weights: Record<string, number>;
  nodes: TourNodeInfo[];
  edges: { a: number; b: number; delta_p: number; delta_l: number;
           delta_s: number }[];
  tabu: number[];
}

export class Api {
  async uploadDataset(csv: Blob | string): Promise<DatasetSummary> {
    const res = await fetch(`${BASE}/datasets`, { method: "POST", body: csv });
    return handle<DatasetSummary>(res);
  }

  datasetDetail(id: string): Promise<DatasetDetail> {
    return getJson(`/datasets/${id}`);
  }

  stats(id: string, selection?: number[]): Promise<{ stats: FeatureStat[] }> {
    const q = selection?.length ? `?selection=${selection.join(",")}` : "";
    return getJson(`/datasets/${id}/stats${q}`);
  }

  correlations(id: string, k = 5):
      Promise<{ correlations: { a: string; b: string; r: number }[] }> {
    return getJson(`/datasets/${id}/correlations?k=${k}`);
  }

  outliers(id: string, feature: number): Promise<{ flags: string[] }> {
    return getJson(`/datasets/${id}/outliers?feature=${feature}`);
  }

  filter(id: string, expression: string): Promise<{ row_indices: number[] }> {
    return postJson(`/datasets/${id}/filter`, { expression });
  }

  createInstance(datasetId: string, params: ClusteringParamsBody,
                 session = "default"): Promise<InstanceInfo> {
    return postJson(`/instances`, { dataset_id: datasetId, params, session });
  }

  instance(id: string): Promise<InstanceInfo> {
    return getJson(`/instances/${id}`);
  }

  patchParams(id: string, patch: ClusteringParamsBody): Promise<InstanceInfo> {
    return postJson(`/instances/${id}/params`, patch);
  }

  precompute(id: string, from = 2, to = 8): Promise<{ computed: number }> {
    return postJson(`/instances/${id}/precompute?from=${from}&to=${to}`, {});
  }

  aggregate(id: string, topM?: number): Promise<AggregateInfo> {
    const q = topM ? `?top_m=${topM}` : "";
    return getJson(`/instances/${id}/aggregate${q}`);
  }

  embedding(id: string, method = "pca", seed = 0): Promise<EmbeddingInfo> {
    return getJson(`/instances/${id}/embedding?method=${method}&seed=${seed}`);
  }

  kscan(id: string, from = 2, to = 8, measures = "silhouette"):
      Promise<KScanInfo> {
    return getJson(`/instances/${id}/kscan?from=${from}&to=${to}` +
                   `&measures=${measures}`);
  }

  rules(id: string, maxDepth = 3):
      Promise<{ training_fidelity: number; rules: Record<string, string[]> }> {
    return getJson(`/instances/${id}/rules?max_depth=${maxDepth}`);
  }

  uncertain(id: string): Promise<{ flagged_rows: number[];
                                   confidence: number[] }> {
    return getJson(`/instances/${id}/uncertain`);
  }

  suggest(id: string, kind: "metric" | "linkage" | "projection" | "measures"):
      Promise<Record<string, unknown>> {
    return getJson(`/instances/${id}/suggest?kind=${kind}`);
  }

  isolate(id: string, rows: number[], params?: ClusteringParamsBody):
      Promise<InstanceInfo> {
    return postJson(`/instances/${id}/isolate`,
                    { row_indices: rows, params });
  }

  nameCluster(id: string, clusterId: number, name: string | null):
      Promise<unknown> {
    return postJson(`/instances/${id}/clusters/${clusterId}/name`, { name });
  }

  createTour(entryInstanceId: string, constraints: Record<string, unknown> = {},
             seed = 0): Promise<{ tour_id: string; mode: string;
                                  weights: Record<string, number> }> {
    return postJson(`/tour`, { entry_instance_id: entryInstanceId,
                               constraints, seed });
  }

  tourStep(tourId: string, feedback: "generate" | "like" | "bad",
           embedding = false): Promise<TourStepResult> {
    return postJson(`/tour/${tourId}/step?embedding=${embedding}`,
                    { feedback });
  }

  tourHistory(tourId: string): Promise<TourHistory> {
    return getJson(`/tour/${tourId}/history`);
  }

  tourAccept(tourId: string): Promise<{ params: Record<string, unknown>;
                                        view_id: string | null }> {
    return postJson(`/tour/${tourId}/accept`, {});
  }

  undo(session = "default"): Promise<unknown> {
    return postJson(`/sessions/${session}/undo`, {});
  }

  redo(session = "default"): Promise<unknown> {
    return postJson(`/sessions/${session}/redo`, {});
  }
}
