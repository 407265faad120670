/**
 * Typed client for the annotation session HTTP API.
 *
 * The fetch implementation is injectable so tests can run against a
 * stateful mock of the documented endpoints.
 */

import type { RleMask } from "./rle.js";

export interface PatchRect {
  y1: number;
  y2: number;
  x1: number;
  x2: number;
}

export interface SessionInfo {
  id: string;
  config: Record<string, unknown>;
  height: number;
  width: number;
}

export interface StepResponse {
  mask: RleMask;
  phase: "coarse" | "refined";
  local_patch: PatchRect | null;
  elapsed_ms: number;
  click_count: number;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

export class ApiClient {
  constructor(private baseUrl: string = "",
              private fetchImpl: FetchLike = (u, i) => fetch(u, i)) {}

  async createSession(image: Blob, config: Record<string, unknown>):
      Promise<SessionInfo> {
    const form = new FormData();
    form.append("image", image, "image.png");
    form.append("config", JSON.stringify(config));
    const response = await this.fetchImpl(`${this.baseUrl}/sessions`,
                                          { method: "POST", body: form });
    return asJson<SessionInfo>(response);
  }

  async postClick(id: string, y: number, x: number, positive: boolean):
      Promise<StepResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${id}/clicks`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ y, x, positive }),
    });
    return asJson<StepResponse>(response);
  }

  async postUndo(id: string): Promise<StepResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${id}/undo`,
                                          { method: "POST" });
    return asJson<StepResponse>(response);
  }

  maskPngUrl(id: string): string {
    return `${this.baseUrl}/sessions/${id}/mask.png`;
  }

  async deleteSession(id: string): Promise<void> {
    await this.fetchImpl(`${this.baseUrl}/sessions/${id}`, { method: "DELETE" });
  }
}
