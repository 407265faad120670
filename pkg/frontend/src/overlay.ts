/**
 * Canvas overlay rendering: image, mask tint, click dots, local-patch
 * rectangle, and the latency strip.
 *
 * Drawing goes through a structural subset of CanvasRenderingContext2D so
 * tests can record calls without a real canvas.
 */

import { AnnotationSession } from "./session.js";
import { Viewport } from "./transform.js";

export interface OverlayContext {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  clearRect(x: number, y: number, w: number, h: number): void;
  drawImage(image: CanvasImageSource, dx: number, dy: number,
            dw: number, dh: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
}

export const MASK_COLOR: [number, number, number] = [46, 204, 113];
export const MASK_ALPHA = 0.45;
export const PATCH_COLOR = "#f1c40f";
export const POSITIVE_COLOR = "#2ecc71";
export const NEGATIVE_COLOR = "#e74c3c";

export interface OverlaySources {
  image: CanvasImageSource | null;     // decoded photo
  maskLayer: CanvasImageSource | null; // offscreen canvas holding mask RGBA
}

export function renderOverlay(ctx: OverlayContext, viewW: number, viewH: number,
                              session: AnnotationSession | null,
                              viewport: Viewport,
                              sources: OverlaySources): void {
  ctx.clearRect(0, 0, viewW, viewH);
  if (!session) {
    return;
  }
  const origin = viewport.imageToScreen({ x: 0, y: 0 });
  const drawW = session.width * viewport.scale;
  const drawH = session.height * viewport.scale;
  if (sources.image) {
    ctx.drawImage(sources.image, origin.x, origin.y, drawW, drawH);
  }
  if (sources.maskLayer) {
    ctx.drawImage(sources.maskLayer, origin.x, origin.y, drawW, drawH);
  }

  for (const click of session.clicks) {
    const p = viewport.imageToScreen({ x: click.x + 0.5, y: click.y + 0.5 });
    ctx.fillStyle = click.positive ? POSITIVE_COLOR : NEGATIVE_COLOR;
    ctx.beginPath();
    ctx.arc(p.x, p.y, 4, 0, 2 * Math.PI);
    ctx.fill();
  }

  if (session.phase === "refined" && session.localPatch) {
    const r = session.localPatch;
    const a = viewport.imageToScreen({ x: r.x1, y: r.y1 });
    const b = viewport.imageToScreen({ x: r.x2, y: r.y2 });
    ctx.strokeStyle = PATCH_COLOR;
    ctx.lineWidth = 2;
    ctx.strokeRect(a.x, a.y, b.x - a.x, b.y - a.y);
  }

  drawLatencyStrip(ctx, viewW, viewH, session);
}

function drawLatencyStrip(ctx: OverlayContext, viewW: number, viewH: number,
                          session: AnnotationSession): void {
  const recent = session.latenciesMs.slice(-32);
  const stripH = 26;
  ctx.fillStyle = "rgba(0, 0, 0, 0.55)";
  ctx.fillRect(0, viewH - stripH, viewW, stripH);
  const barW = 5;
  for (let i = 0; i < recent.length; i++) {
    const h = Math.min(stripH - 8, Math.max(2, recent[i] / 10));
    ctx.fillStyle = recent[i] > 200 ? NEGATIVE_COLOR : POSITIVE_COLOR;
    ctx.fillRect(4 + i * (barW + 2), viewH - 4 - h, barW, h);
  }
  ctx.fillStyle = "#ffffff";
  ctx.font = "12px sans-serif";
  const last = recent.length ? `${Math.round(recent[recent.length - 1])} ms` : "-";
  ctx.fillText(
    `clicks ${session.clickCount}  phase ${session.phase}  ` +
      `last ${last}  SPC ${Math.round(session.meanSpcMs)} ms`,
    Math.min(240, viewW / 2), viewH - 9);
}
