/**
 * Screen <-> image coordinate mapping with zoom and pan.
 *
 * Image point (x, y) maps to screen (x * scale + offsetX, y * scale + offsetY).
 * Clicks are resolved to integer image pixels via floor, so every screen
 * point inside the drawn image hits exactly one pixel.
 */

export interface Point {
  x: number;
  y: number;
}

export class Viewport {
  scale = 1;
  offsetX = 0;
  offsetY = 0;

  /** Contain-fit the image, centered in the view. */
  fitTo(imageW: number, imageH: number, viewW: number, viewH: number): void {
    this.scale = Math.min(viewW / imageW, viewH / imageH);
    this.offsetX = (viewW - imageW * this.scale) / 2;
    this.offsetY = (viewH - imageH * this.scale) / 2;
  }

  imageToScreen(p: Point): Point {
    return { x: p.x * this.scale + this.offsetX,
             y: p.y * this.scale + this.offsetY };
  }

  screenToImage(p: Point): Point {
    return { x: (p.x - this.offsetX) / this.scale,
             y: (p.y - this.offsetY) / this.scale };
  }

  /** Integer pixel under a screen point, or null when outside the image. */
  pixelAt(p: Point, imageW: number, imageH: number): { y: number; x: number } | null {
    const img = this.screenToImage(p);
    const x = Math.floor(img.x);
    const y = Math.floor(img.y);
    if (x < 0 || y < 0 || x >= imageW || y >= imageH) {
      return null;
    }
    return { y, x };
  }

  /** Zoom by a factor keeping the given screen point fixed. */
  zoomAt(p: Point, factor: number, minScale = 0.05, maxScale = 64): void {
    const next = Math.min(Math.max(this.scale * factor, minScale), maxScale);
    const applied = next / this.scale;
    this.offsetX = p.x - (p.x - this.offsetX) * applied;
    this.offsetY = p.y - (p.y - this.offsetY) * applied;
    this.scale = next;
  }

  panBy(dx: number, dy: number): void {
    this.offsetX += dx;
    this.offsetY += dy;
  }
}

/** Mouse button -> click polarity; anything but left/right is ignored. */
export function polarityForButton(button: number): boolean | null {
  if (button === 0) return true;
  if (button === 2) return false;
  return null;
}
