import { ApiClient } from "./api.js";
import { parsePgm, type SaliencyGrid } from "./pgm.js";
import { pollJob, type PollOptions } from "./poll.js";
import type {
  AxisValue,
  EvaluationRecord,
  Job,
  MethodName,
  WireDetection,
} from "./types.js";

export type Stage =
  | "empty"
  | "uploaded"
  | "detected"
  | "explaining"
  | "explained"
  | "evaluating"
  | "evaluated";

export interface SessionOptions {
  backend?: string;
  poll?: PollOptions;
}

/**
 * The interactive session: upload, detect, pick a target box, pick a
 * method, explain, view the overlay, evaluate, read the spider plot.
 *
 * Guards enforce the flow order; in particular evaluation can never be
 * requested until the explain job has reached the done state and its
 * saliency artifact is loaded.
 */
export class Session {
  stage: Stage = "empty";
  backend: string;
  imageId: string | null = null;
  detections: WireDetection[] = [];
  detectionsToken: string | null = null;
  selectedTargetIndex: number | null = null;
  selectedMethod: MethodName = "drise";
  explainJob: Job | null = null;
  evaluateJob: Job | null = null;
  saliency: SaliencyGrid | null = null;
  saliencyRef: string | null = null;
  record: EvaluationRecord | null = null;
  axes: AxisValue[] | null = null;
  lastError: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly options: SessionOptions = {},
  ) {
    this.backend = options.backend ?? "synthetic";
  }

  canExplain(): boolean {
    return (
      (this.stage === "detected" || this.stage === "explained" || this.stage === "evaluated") &&
      this.selectedTargetIndex !== null
    );
  }

  /** Evaluation stays disabled until a saliency artifact exists. */
  canEvaluate(): boolean {
    return (
      this.explainJob?.state === "done" &&
      this.saliencyRef !== null &&
      this.saliency !== null &&
      this.stage !== "evaluating"
    );
  }

  async upload(png: Blob | ArrayBuffer): Promise<string> {
    const { image_id } = await this.api.uploadImage(png);
    this.imageId = image_id;
    this.detections = [];
    this.detectionsToken = null;
    this.selectedTargetIndex = null;
    this.explainJob = null;
    this.evaluateJob = null;
    this.saliency = null;
    this.saliencyRef = null;
    this.record = null;
    this.axes = null;
    this.stage = "uploaded";
    return image_id;
  }

  async detect(): Promise<WireDetection[]> {
    if (this.imageId === null) throw new Error("upload an image first");
    const response = await this.api.detect(this.imageId, this.backend);
    this.detections = response.detections;
    this.detectionsToken = response.token;
    this.selectedTargetIndex = null;
    this.stage = "detected";
    return this.detections;
  }

  selectTarget(index: number): void {
    if (index < 0 || index >= this.detections.length) {
      throw new Error(`target index ${index} out of range (${this.detections.length} detections)`);
    }
    this.selectedTargetIndex = index;
  }

  selectMethod(method: MethodName): void {
    this.selectedMethod = method;
  }

  async explain(config: Record<string, unknown> = {}): Promise<Job> {
    if (!this.canExplain() || this.imageId === null || this.selectedTargetIndex === null) {
      throw new Error("select a detection before explaining");
    }
    this.stage = "explaining";
    this.record = null;
    this.axes = null;
    try {
      const { job_id } = await this.api.explain({
        image_id: this.imageId,
        backend: this.backend,
        method: this.selectedMethod,
        target_index: this.selectedTargetIndex,
        detections_token: this.detectionsToken,
        config,
      });
      const job = await pollJob((id) => this.api.getJob(id), job_id, {
        ...this.options.poll,
        onUpdate: (update) => {
          this.explainJob = update;
          this.options.poll?.onUpdate?.(update);
        },
      });
      this.explainJob = job;
      if (job.state !== "done" || job.result_ref === null) {
        this.stage = "detected";
        this.lastError = job.error ?? "explanation failed";
        throw new Error(this.lastError);
      }
      this.saliencyRef = job.result_ref["saliency_pgm"] as string;
      this.saliency = parsePgm(await this.api.fetchArtifact(this.saliencyRef));
      this.stage = "explained";
      return job;
    } catch (error) {
      if (this.stage === "explaining") this.stage = "detected";
      throw error;
    }
  }

  async evaluate(config: Record<string, unknown> = {}): Promise<EvaluationRecord> {
    if (!this.canEvaluate()) {
      throw new Error("evaluation requires a completed explanation");
    }
    if (this.imageId === null || this.saliencyRef === null || this.selectedTargetIndex === null) {
      throw new Error("evaluation requires a completed explanation");
    }
    this.stage = "evaluating";
    try {
      const { job_id } = await this.api.evaluate({
        image_id: this.imageId,
        saliency_ref: this.saliencyRef,
        target_index: this.selectedTargetIndex,
        backend: this.backend,
        detections_token: this.detectionsToken,
        config,
      });
      const job = await pollJob((id) => this.api.getJob(id), job_id, this.options.poll);
      this.evaluateJob = job;
      if (job.state !== "done" || job.result_ref === null) {
        this.stage = "explained";
        this.lastError = job.error ?? "evaluation failed";
        throw new Error(this.lastError);
      }
      this.record = job.result_ref["record"] as EvaluationRecord;
      this.axes = job.result_ref["axes"] as AxisValue[];
      this.stage = "evaluated";
      return this.record;
    } catch (error) {
      if (this.stage === "evaluating") this.stage = "explained";
      throw error;
    }
  }
}
