/** Studio session state and the edit -> replan -> preview loop.
 *
 * Edits are validated, debounced (250 ms) and submitted as replan patches.
 * Each submission carries a sequence number; responses for superseded
 * sequences are dropped so the preview always reflects the latest config.
 */

import { Debouncer } from "./debounce.js";
import type { ConfigPatch, JobView, PlanConfigDoc, PlanDoc } from "./types.js";
import { defaultConfig } from "./types.js";
import { applyPatch, validateConfig, type Violation } from "./validate.js";

export const EDIT_DEBOUNCE_MS = 250;
export const POLL_INTERVAL_MS = 300;

/** The slice of the job API the session depends on (StudioApi satisfies it). */
export interface JobApi {
  createJob(image: Blob, config: ConfigPatch): Promise<string>;
  getJob(id: string): Promise<JobView>;
  getResultBytes(id: string): Promise<ArrayBuffer>;
  getPlan(id: string): Promise<PlanDoc>;
  replan(id: string, patch: ConfigPatch): Promise<string>;
}

export interface SessionEvents {
  onPreview?: (png: ArrayBuffer, job: JobView) => void;
  onPlan?: (plan: PlanDoc) => void;
  onStatus?: (text: string) => void;
  onError?: (message: string) => void;
  onValidation?: (violations: Violation[]) => void;
}

export class SessionState {
  config: PlanConfigDoc = defaultConfig();
  lastJobId: string | null = null;
  plan: PlanDoc | null = null;
  planHash: string | null = null;
  selection = new Set<number>();
  excluded = new Set<number>();

  private sequence = 0;
  private applied = 0;
  private inFlight = false;
  private pendingPatch: ConfigPatch | null = null;
  private debouncer: Debouncer<ConfigPatch>;

  constructor(
    private api: JobApi,
    private events: SessionEvents = {},
    private sleep: (ms: number) => Promise<void> = (ms) =>
      new Promise((resolve) => setTimeout(resolve, ms)),
  ) {
    this.debouncer = new Debouncer(EDIT_DEBOUNCE_MS, (patch) => {
      void this.replanNow(patch);
    });
  }

  /** Upload a new image and start the first job with the active config. */
  async start(image: Blob): Promise<void> {
    const violations = validateConfig(this.config);
    if (violations.length) {
      this.events.onValidation?.(violations);
      return;
    }
    this.selection.clear();
    this.excluded.clear();
    const seq = ++this.sequence;
    try {
      const id = await this.api.createJob(image, this.config as unknown as ConfigPatch);
      await this.track(id, seq);
    } catch (err) {
      this.events.onError?.(String(err));
    }
  }

  /** Validate and stage an edit; rapid edits collapse into one replan. */
  edit(patch: ConfigPatch): Violation[] {
    const candidate = applyPatch(this.config, patch);
    const violations = validateConfig(candidate);
    this.events.onValidation?.(violations);
    if (violations.length) {
      return violations; // invalid: inline message, no network call
    }
    this.config = candidate;
    this.debouncer.push(patch);
    return [];
  }

  /** Toggle one stroke's visibility; resubmits with the exclusion list. */
  toggleStroke(index: number): void {
    if (this.planHash === null) return;
    if (this.excluded.has(index)) {
      this.excluded.delete(index);
    } else {
      this.excluded.add(index);
    }
    const exclusions =
      this.excluded.size === 0
        ? null
        : { plan_hash: this.planHash, indices: [...this.excluded].sort((a, b) => a - b) };
    this.config = applyPatch(this.config, { exclusions });
    this.debouncer.push({ exclusions });
  }

  /** Submit a replan immediately (bypassing the debounce window).
   *
   * At most one replan is in flight: patches arriving meanwhile merge into
   * a single follow-up submission.
   */
  async replanNow(patch: ConfigPatch): Promise<void> {
    if (this.lastJobId === null) {
      return;
    }
    if (this.inFlight) {
      this.pendingPatch = this.pendingPatch ? applyPatch(this.pendingPatch, patch) : patch;
      return;
    }
    this.inFlight = true;
    const seq = ++this.sequence;
    try {
      const id = await this.api.replan(this.lastJobId, patch);
      await this.track(id, seq);
    } catch (err) {
      this.events.onError?.(String(err));
    } finally {
      this.inFlight = false;
      if (this.pendingPatch !== null) {
        const next = this.pendingPatch;
        this.pendingPatch = null;
        void this.replanNow(next);
      }
    }
  }

  /** Poll a job to completion; drop the result if a newer edit superseded it. */
  private async track(id: string, seq: number): Promise<void> {
    this.events.onStatus?.("running");
    for (;;) {
      let job: JobView;
      try {
        job = await this.api.getJob(id);
      } catch (err) {
        this.events.onError?.(String(err));
        return;
      }
      if (job.state === "done") {
        if (seq < this.applied) return; // stale response: a newer job already landed
        this.applied = seq;
        this.lastJobId = id;
        const [png, plan] = await Promise.all([
          this.api.getResultBytes(id),
          this.api.getPlan(id),
        ]);
        if (seq < this.applied) return;
        this.plan = plan;
        this.planHash = job.result?.plan_hash ?? null;
        this.events.onPlan?.(plan);
        this.events.onPreview?.(png, job);
        this.events.onStatus?.(
          `done: ${job.result?.stroke_count ?? 0} strokes` +
            (job.result
              ? ` (${Object.entries(job.result.timings)
                  .map(([k, v]) => `${k} ${(v * 1000).toFixed(0)}ms`)
                  .join(", ")})`
              : ""),
        );
        return;
      }
      if (job.state === "failed") {
        this.events.onError?.(job.error ?? "job failed");
        return;
      }
      await this.sleep(POLL_INTERVAL_MS);
    }
  }
}
