import type { DetectResponse, Job } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin REST client; every server interaction goes through here. */
export class ApiClient {
  constructor(
    private readonly base = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (body.detail !== undefined) detail = JSON.stringify(body.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  uploadImage(png: Blob | ArrayBuffer): Promise<{ image_id: string }> {
    return this.request("/api/images", {
      method: "POST",
      headers: { "Content-Type": "image/png" },
      body: png instanceof Blob ? png : new Blob([png]),
    });
  }

  detect(imageId: string, backend: string): Promise<DetectResponse> {
    return this.request("/api/detect", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ image_id: imageId, backend }),
    });
  }

  explain(body: {
    image_id: string;
    backend: string;
    method: string;
    target_index: number;
    detections_token: string | null;
    config: Record<string, unknown>;
  }): Promise<{ job_id: string }> {
    return this.request("/api/explain", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  evaluate(body: {
    image_id: string;
    saliency_ref: string;
    target_index: number;
    backend: string;
    detections_token: string | null;
    config: Record<string, unknown>;
  }): Promise<{ job_id: string }> {
    return this.request("/api/evaluate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getJob(jobId: string): Promise<Job> {
    return this.request(`/api/jobs/${jobId}`);
  }

  backends(): Promise<{ backends: { name: string; spec: string }[] }> {
    return this.request("/api/backends");
  }

  artifactUrl(ref: string): string {
    return `${this.base}/api/artifacts/${ref}`;
  }

  async fetchArtifact(ref: string): Promise<ArrayBuffer> {
    const response = await this.fetchFn(this.artifactUrl(ref));
    if (!response.ok) throw new ApiError(response.status, `artifact ${ref}`);
    return response.arrayBuffer();
  }
}
