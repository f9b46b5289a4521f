// Payload shapes of the REST API (see docs/openapi.json in the repo root).

export interface WireDetection {
  index: number;
  bbox: [number, number, number, number];
  objectness: number;
  class_probs: number[];
  label: number;
  class_name: string;
}

export interface DetectResponse {
  detections: WireDetection[];
  token: string;
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface Job {
  job_id: string;
  kind: string;
  state: JobState;
  progress: number;
  result_ref: Record<string, unknown> | null;
  error: string | null;
  created_at: number;
}

export interface EvaluationRecord {
  method: string;
  model: string;
  dataset: string;
  image_id: string;
  instance_id: string;
  category: string;
  ins_auc: number;
  del_auc: number;
  oa: number;
  pg_hit: boolean;
  ebpg: number | null;
  sparsity: number;
  time_s: number;
}

export interface AxisValue {
  name: string;
  value: number | null;
  raw: number | null;
  higher_better: boolean;
}

export interface EvaluateResult {
  record: EvaluationRecord;
  axes: AxisValue[];
}

export type MethodName = "drise" | "dclose" | "gcame";
