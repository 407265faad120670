/**
 * Client-side session state: always a mirror of the last server-acknowledged
 * response, never locally edited.  Click requests are serialized: one in
 * flight, the rest queued and dispatched in order.
 */

import { ApiClient, PatchRect, SessionInfo, StepResponse } from "./api.js";
import { decodeRle } from "./rle.js";

export interface UiClick {
  y: number;
  x: number;
  positive: boolean;
}

interface QueuedOp {
  click: UiClick | null;    // null = undo
  resolve: (r: StepResponse) => void;
  reject: (e: unknown) => void;
}

export class AnnotationSession {
  readonly id: string;
  readonly height: number;
  readonly width: number;
  readonly nTrigger: number;

  clicks: UiClick[] = [];
  mask: Uint8Array;
  phase: "coarse" | "refined" = "coarse";
  localPatch: PatchRect | null = null;
  latenciesMs: number[] = [];

  private queue: QueuedOp[] = [];
  private inFlight = false;

  constructor(private api: ApiClient, info: SessionInfo) {
    this.id = info.id;
    this.height = info.height;
    this.width = info.width;
    this.nTrigger = Number(info.config["n_trigger"] ?? 5);
    this.mask = new Uint8Array(this.height * this.width);
  }

  get clickCount(): number {
    return this.clicks.length;
  }

  /** Running mean of per-click latency, the operator-facing SPC readout. */
  get meanSpcMs(): number {
    if (this.latenciesMs.length === 0) return 0;
    return this.latenciesMs.reduce((a, b) => a + b, 0) / this.latenciesMs.length;
  }

  get pendingCount(): number {
    return this.queue.length + (this.inFlight ? 1 : 0);
  }

  /** Queue a click; resolves with the acknowledged step in request order. */
  sendClick(y: number, x: number, positive: boolean): Promise<StepResponse> {
    return this.enqueue({ y, x, positive });
  }

  /** Undo goes through the same queue, so it never overtakes a click. */
  undo(): Promise<StepResponse> {
    return this.enqueue(null);
  }

  private enqueue(click: UiClick | null): Promise<StepResponse> {
    return new Promise<StepResponse>((resolve, reject) => {
      this.queue.push({ click, resolve, reject });
      void this.pump();
    });
  }

  private async pump(): Promise<void> {
    if (this.inFlight) return;
    const next = this.queue.shift();
    if (!next) return;
    this.inFlight = true;
    try {
      const step = next.click
        ? await this.api.postClick(this.id, next.click.y, next.click.x,
                                   next.click.positive)
        : await this.api.postUndo(this.id);
      this.accept(step, next.click);
      next.resolve(step);
    } catch (e) {
      // server rejected or died: state stays at the last acknowledged step
      next.reject(e);
    } finally {
      this.inFlight = false;
      void this.pump();
    }
  }

  private accept(step: StepResponse, click: UiClick | null): void {
    if (click !== null) {
      this.clicks.push(click);
      this.latenciesMs.push(step.elapsed_ms);
    } else {
      this.clicks.pop();
      this.latenciesMs.pop();
    }
    this.mask = decodeRle(step.mask);
    this.phase = step.phase;
    this.localPatch = step.local_patch;
  }

  exportUrl(): string {
    return this.api.maskPngUrl(this.id);
  }
}

/** Open an image: create a server session and mirror its echoed config. */
export async function openImage(api: ApiClient, image: Blob,
                                nTrigger: number | null):
    Promise<AnnotationSession> {
  const config: Record<string, unknown> = {};
  if (nTrigger !== null) {
    config["n_trigger"] = nTrigger;
  }
  const info = await api.createSession(image, config);
  return new AnnotationSession(api, info);
}
