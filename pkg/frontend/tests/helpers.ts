import type { AxisValue, EvaluationRecord, Job, WireDetection } from "../src/types.js";

export function makePgmBytes(width: number, height: number, values: number[]): ArrayBuffer {
  const header = `P5\n${width} ${height}\n65535\n`;
  const headerBytes = new TextEncoder().encode(header);
  const buffer = new ArrayBuffer(headerBytes.length + width * height * 2);
  new Uint8Array(buffer).set(headerBytes, 0);
  const view = new DataView(buffer, headerBytes.length);
  values.forEach((value, i) => view.setUint16(i * 2, Math.round(value * 65535), false));
  return buffer;
}

export const DETECTIONS: WireDetection[] = [
  {
    index: 0,
    bbox: [4, 4, 20, 20],
    objectness: 0.9,
    class_probs: [0.9, 0.05, 0.05],
    label: 0,
    class_name: "red",
  },
  {
    index: 1,
    bbox: [30, 10, 60, 40],
    objectness: 0.8,
    class_probs: [0.1, 0.8, 0.1],
    label: 1,
    class_name: "green",
  },
];

export const RECORD: EvaluationRecord = {
  method: "drise",
  model: "synthetic",
  dataset: "interactive",
  image_id: "img",
  instance_id: "target1",
  category: "green",
  ins_auc: 0.82,
  del_auc: 0.12,
  oa: 0.7,
  pg_hit: true,
  ebpg: 0.61,
  sparsity: 3.4,
  time_s: 1.25,
};

export const AXES: AxisValue[] = [
  { name: "OA", value: 1.0, raw: 0.7, higher_better: true },
  { name: "EBPG", value: 1.0, raw: 0.61, higher_better: true },
  { name: "Sparsity", value: 1.0, raw: 3.4, higher_better: true },
];

interface FakeJob {
  job: Job;
  /** States the job walks through on successive GETs. */
  plan: Job["state"][];
  result: Record<string, unknown> | null;
  error?: string;
}

/** Programmable in-memory stand-in for the REST service. */
export class FakeServer {
  requests: { method: string; path: string; body: unknown }[] = [];
  private jobs = new Map<string, FakeJob>();
  private artifacts = new Map<string, ArrayBuffer>();
  private jobCounter = 0;
  saliency = makePgmBytes(8, 6, Array.from({ length: 48 }, (_, i) => i / 47));
  explainPlan: Job["state"][] = ["queued", "running", "done"];
  evaluatePlan: Job["state"][] = ["running", "done"];
  failExplain = false;

  fetch = async (input: string, init?: RequestInit): Promise<Response> => {
    const url = new URL(input, "http://fake");
    const method = init?.method ?? "GET";
    const body =
      typeof init?.body === "string" && init.body.length > 0 ? JSON.parse(init.body) : null;
    this.requests.push({ method, path: url.pathname, body });

    if (method === "POST" && url.pathname === "/api/images") {
      return json({ image_id: "a".repeat(64) });
    }
    if (method === "POST" && url.pathname === "/api/detect") {
      return json({ detections: DETECTIONS, token: "tok-1" });
    }
    if (method === "POST" && url.pathname === "/api/explain") {
      if (
        body.target_index < 0 ||
        body.target_index >= DETECTIONS.length ||
        (body.detections_token && body.detections_token !== "tok-1")
      ) {
        return json({ detail: "target index stale" }, 409);
      }
      this.artifacts.set("sal".padEnd(64, "0"), this.saliency);
      return json({
        job_id: this.addJob(
          "explain",
          this.explainPlan,
          this.failExplain
            ? null
            : { saliency_pgm: "sal".padEnd(64, "0"), sidecar: "sc".padEnd(64, "0"), width: 8, height: 6 },
          this.failExplain ? "backend exploded" : undefined,
        ),
      });
    }
    if (method === "POST" && url.pathname === "/api/evaluate") {
      return json({
        job_id: this.addJob("evaluate", this.evaluatePlan, { record: RECORD, axes: AXES }),
      });
    }
    const jobMatch = url.pathname.match(/^\/api\/jobs\/(.+)$/);
    if (method === "GET" && jobMatch) {
      const fake = this.jobs.get(jobMatch[1]!);
      if (!fake) return json({ detail: "unknown job" }, 404);
      const state = fake.plan.length > 1 ? fake.plan.shift()! : fake.plan[0]!;
      fake.job.state = state;
      fake.job.progress = state === "done" ? 1 : Math.min(0.9, fake.job.progress + 0.3);
      if (state === "done") fake.job.result_ref = fake.result;
      if (state === "failed") fake.job.error = fake.error ?? "failed";
      return json(fake.job);
    }
    const artifactMatch = url.pathname.match(/^\/api\/artifacts\/(.+)$/);
    if (method === "GET" && artifactMatch) {
      const data = this.artifacts.get(artifactMatch[1]!);
      if (!data) return json({ detail: "unknown artifact" }, 404);
      return new Response(data, { status: 200 });
    }
    return json({ detail: `no route ${method} ${url.pathname}` }, 404);
  };

  private addJob(
    kind: string,
    plan: Job["state"][],
    result: Record<string, unknown> | null,
    error?: string,
  ): string {
    this.jobCounter += 1;
    const jobId = `job-${this.jobCounter}`;
    const finalPlan = error ? plan.map((s) => (s === "done" ? "failed" : s)) : plan;
    this.jobs.set(jobId, {
      job: {
        job_id: jobId,
        kind,
        state: "queued",
        progress: 0,
        result_ref: null,
        error: null,
        created_at: 0,
      },
      plan: [...finalPlan],
      result,
      error,
    });
    return jobId;
  }

  pathsSeen(): string[] {
    return this.requests.map((r) => `${r.method} ${r.path}`);
  }
}

function json(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export const instantSleep = () => Promise.resolve();
