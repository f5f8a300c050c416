/** 1 Hz job polling with at most one in-flight request per job.
 *
 * Polling stops by itself when a job reaches done/failed, when stop() is
 * called (e.g. the job was deleted), or when a poll errors out (the error
 * is forwarded so the view can surface it).
 */

import type { JobView } from "./api.js";

export const POLL_INTERVAL_MS = 1000;

export class JobPoller {
  private timers = new Map<string, ReturnType<typeof setTimeout>>();
  private inFlight = new Set<string>();

  constructor(
    private readonly fetchStatus: (jobId: string) => Promise<JobView>,
    private readonly onUpdate: (view: JobView) => void,
    private readonly onError: (jobId: string, error: unknown) => void = () => {},
    private readonly intervalMs: number = POLL_INTERVAL_MS,
  ) {}

  watch(jobId: string): void {
    if (this.timers.has(jobId) || this.inFlight.has(jobId)) return;
    void this.pollOnce(jobId);
  }

  stop(jobId: string): void {
    const timer = this.timers.get(jobId);
    if (timer !== undefined) clearTimeout(timer);
    this.timers.delete(jobId);
  }

  stopAll(): void {
    for (const jobId of [...this.timers.keys()]) this.stop(jobId);
  }

  watching(jobId: string): boolean {
    return this.timers.has(jobId) || this.inFlight.has(jobId);
  }

  private async pollOnce(jobId: string): Promise<void> {
    this.timers.delete(jobId);
    this.inFlight.add(jobId);
    let view: JobView;
    try {
      view = await this.fetchStatus(jobId);
    } catch (error) {
      this.inFlight.delete(jobId);
      this.onError(jobId, error);
      return;
    }
    this.inFlight.delete(jobId);
    this.onUpdate(view);
    if (view.status === "queued" || view.status === "running") {
      this.timers.set(
        jobId,
        setTimeout(() => void this.pollOnce(jobId), this.intervalMs),
      );
    }
  }
}
