/** Wire types of the annotation service under /api/v1. */

export type Verdict = "positive" | "negative";

export interface Coords {
  point: [number, number];
  cluster: [number, number][];
}

export interface QuerySide {
  sample_id: number;
  image_url?: string;
  coords?: Coords | null;
}

export interface QueryPayload {
  query_id: number;
  kind: "split" | "merge";
  epoch: number;
  a: QuerySide;
  b: QuerySide;
}

export interface StatePayload {
  epoch: number;
  phase: "warmup" | "active" | "waiting_labels" | "done";
  pending: number;
}

export interface MetricsPayload {
  epoch: number;
  n_clusters: number;
  n_outliers: number;
  queries_issued: number;
  cumulative_m: number;
  cost_percent: number;
  pairwise_precision: number | null;
  pairwise_recall: number | null;
  pairwise_f1: number | null;
  nmi: number | null;
}

export interface SubmitResponse {
  accepted: boolean;
  m: number;
}
