/**
 * DOM wiring for the annotation client.
 *
 * Left click adds a positive point, right click a negative one (the context
 * menu is suppressed); wheel zooms about the cursor, middle-drag pans.  The
 * mask overlay, local-patch rectangle, and latency strip redraw after every
 * acknowledged response; a failed request leaves the previous overlay.
 */

import { ApiClient, ApiError } from "./api.js";
import { maskToRgba } from "./rle.js";
import { AnnotationSession, openImage } from "./session.js";
import { MASK_ALPHA, MASK_COLOR, renderOverlay } from "./overlay.js";
import { Viewport, polarityForButton } from "./transform.js";

const api = new ApiClient("");
const viewport = new Viewport();

let session: AnnotationSession | null = null;
let photo: HTMLImageElement | null = null;
let maskLayer: HTMLCanvasElement | null = null;

const canvas = document.getElementById("canvas") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const fileInput = document.getElementById("file") as HTMLInputElement;
const undoButton = document.getElementById("undo") as HTMLButtonElement;
const exportButton = document.getElementById("export") as HTMLButtonElement;
const triggerInput = document.getElementById("trigger") as HTMLInputElement;
const toast = document.getElementById("toast") as HTMLDivElement;

function showToast(message: string): void {
  toast.textContent = message;
  toast.classList.add("visible");
  window.setTimeout(() => toast.classList.remove("visible"), 2500);
}

function rebuildMaskLayer(): void {
  if (!session) {
    maskLayer = null;
    return;
  }
  if (!maskLayer || maskLayer.width !== session.width
      || maskLayer.height !== session.height) {
    maskLayer = document.createElement("canvas");
    maskLayer.width = session.width;
    maskLayer.height = session.height;
  }
  const layerCtx = maskLayer.getContext("2d")!;
  const rgba = maskToRgba(session.mask, MASK_COLOR, MASK_ALPHA);
  layerCtx.putImageData(
    new ImageData(new Uint8ClampedArray(rgba), session.width, session.height), 0, 0);
}

function redraw(): void {
  renderOverlay(ctx, canvas.width, canvas.height, session, viewport,
                { image: photo, maskLayer });
  undoButton.disabled = !session || session.clickCount === 0;
  exportButton.disabled = !session;
}

function resizeCanvas(): void {
  canvas.width = canvas.clientWidth;
  canvas.height = canvas.clientHeight;
  if (session) {
    viewport.fitTo(session.width, session.height, canvas.width, canvas.height);
  }
  redraw();
}

fileInput.addEventListener("change", async () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  const trigger = triggerInput.value ? Number(triggerInput.value) : null;
  try {
    session = await openImage(api, file, trigger);
  } catch (e) {
    showToast(e instanceof ApiError ? `server: ${e.message}` : `${e}`);
    return;
  }
  photo = new Image();
  photo.onload = () => {
    viewport.fitTo(session!.width, session!.height, canvas.width, canvas.height);
    rebuildMaskLayer();
    redraw();
  };
  photo.src = URL.createObjectURL(file);
  document.getElementById("session-id")!.textContent =
    `${session.id.slice(0, 8)} (n=${session.nTrigger})`;
});

canvas.addEventListener("contextmenu", (e) => e.preventDefault());

canvas.addEventListener("mousedown", (e) => {
  if (!session || !photo) return;
  const positive = polarityForButton(e.button);
  if (positive === null) return;
  const rect = canvas.getBoundingClientRect();
  const pixel = viewport.pixelAt(
    { x: e.clientX - rect.left, y: e.clientY - rect.top },
    session.width, session.height);
  if (pixel === null) {
    canvas.classList.add("flash");
    window.setTimeout(() => canvas.classList.remove("flash"), 150);
    return;
  }
  session.sendClick(pixel.y, pixel.x, positive)
    .then(() => {
      rebuildMaskLayer();
      redraw();
    })
    .catch((err) => {
      showToast(err instanceof ApiError ? `server: ${err.message}` : `${err}`);
    });
});

canvas.addEventListener("wheel", (e) => {
  if (!session) return;
  e.preventDefault();
  const rect = canvas.getBoundingClientRect();
  viewport.zoomAt({ x: e.clientX - rect.left, y: e.clientY - rect.top },
                  e.deltaY < 0 ? 1.2 : 1 / 1.2);
  redraw();
});

let panFrom: { x: number; y: number } | null = null;
canvas.addEventListener("mousedown", (e) => {
  if (e.button === 1) {
    panFrom = { x: e.clientX, y: e.clientY };
    e.preventDefault();
  }
});
window.addEventListener("mousemove", (e) => {
  if (panFrom) {
    viewport.panBy(e.clientX - panFrom.x, e.clientY - panFrom.y);
    panFrom = { x: e.clientX, y: e.clientY };
    redraw();
  }
});
window.addEventListener("mouseup", () => { panFrom = null; });

undoButton.addEventListener("click", async () => {
  if (!session || session.clickCount === 0) return;
  try {
    await session.undo();
    rebuildMaskLayer();
    redraw();
  } catch (e) {
    showToast(e instanceof ApiError ? `server: ${e.message}` : `${e}`);
  }
});

exportButton.addEventListener("click", () => {
  if (!session) return;
  const link = document.createElement("a");
  link.href = session.exportUrl();
  link.download = "mask.png";
  link.click();
});

window.addEventListener("resize", resizeCanvas);
resizeCanvas();
