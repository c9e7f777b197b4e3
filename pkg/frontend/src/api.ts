/** Typed client for the job API. The fetch function is injectable so tests
 * can run against a stub or a live service interchangeably. */

import type { ConfigPatch, JobView, PlanDoc } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function raiseFor(response: Response): Promise<void> {
  if (response.ok) return;
  let code = "error";
  let message = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    code = body.code ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, code, message);
}

export class StudioApi {
  constructor(
    private base: string,
    private fetchFn: FetchLike = fetch,
  ) {}

  async createJob(image: Blob, config: ConfigPatch): Promise<string> {
    const form = new FormData();
    form.append("image", image, "upload.png");
    form.append("config", JSON.stringify(config));
    const r = await this.fetchFn(`${this.base}/api/jobs`, { method: "POST", body: form });
    await raiseFor(r);
    return (await r.json()).id;
  }

  async getJob(id: string): Promise<JobView> {
    const r = await this.fetchFn(`${this.base}/api/jobs/${id}`);
    await raiseFor(r);
    return await r.json();
  }

  async getResultBytes(id: string): Promise<ArrayBuffer> {
    const r = await this.fetchFn(`${this.base}/api/jobs/${id}/result.png`);
    await raiseFor(r);
    return await r.arrayBuffer();
  }

  async getPlan(id: string): Promise<PlanDoc> {
    const r = await this.fetchFn(`${this.base}/api/jobs/${id}/strokes`);
    await raiseFor(r);
    return await r.json();
  }

  async replan(id: string, patch: ConfigPatch): Promise<string> {
    const r = await this.fetchFn(`${this.base}/api/jobs/${id}/replan`, {
      method: "POST",
      body: JSON.stringify(patch),
      headers: { "content-type": "application/json" },
    });
    await raiseFor(r);
    return (await r.json()).id;
  }

  async deleteJob(id: string): Promise<void> {
    const r = await this.fetchFn(`${this.base}/api/jobs/${id}`, { method: "DELETE" });
    await raiseFor(r);
  }
}
