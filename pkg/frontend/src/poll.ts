import type { Job } from "./types.js";

export interface PollOptions {
  baseMs?: number;
  capMs?: number;
  sleep?: (ms: number) => Promise<void>;
  onUpdate?: (job: Job) => void;
}

const realSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

/**
 * Poll a job until it reaches a terminal state. The interval backs off
 * (doubling from baseMs, capped at capMs) and polling stops immediately on
 * done/failed.
 */
export async function pollJob(
  getJob: (jobId: string) => Promise<Job>,
  jobId: string,
  { baseMs = 1000, capMs = 5000, sleep = realSleep, onUpdate }: PollOptions = {},
): Promise<Job> {
  let interval = baseMs;
  for (;;) {
    const job = await getJob(jobId);
    onUpdate?.(job);
    if (job.state === "done" || job.state === "failed") return job;
    await sleep(interval);
    interval = Math.min(interval * 2, capMs);
  }
}
