import { describe, expect, it } from "vitest";

import { Viewport, polarityForButton } from "../src/transform.js";

describe("viewport", () => {
  it("fit centers and contains the image", () => {
    const vp = new Viewport();
    vp.fitTo(200, 100, 400, 400);
    expect(vp.scale).toBe(2);
    const topLeft = vp.imageToScreen({ x: 0, y: 0 });
    const bottomRight = vp.imageToScreen({ x: 200, y: 100 });
    expect(topLeft).toEqual({ x: 0, y: 100 });
    expect(bottomRight).toEqual({ x: 400, y: 300 });
  });

  it("round-trips pixel centers within 1 px at every zoom level", () => {
    const vp = new Viewport();
    vp.fitTo(300, 200, 640, 480);
    for (const factor of [0.25, 0.5, 1, 2, 4, 8]) {
      const zoomed = new Viewport();
      zoomed.scale = vp.scale * factor;
      zoomed.offsetX = 17.3;
      zoomed.offsetY = -4.9;
      for (let i = 0; i < 50; i++) {
        const p = { x: (i * 7) % 300 + 0.5, y: (i * 13) % 200 + 0.5 };
        const back = zoomed.screenToImage(zoomed.imageToScreen(p));
        expect(Math.hypot(back.x - p.x, back.y - p.y)).toBeLessThan(1);
      }
    }
  });

  it("resolves screen points to integer pixels with bounds", () => {
    const vp = new Viewport();
    vp.scale = 2;
    vp.offsetX = 10;
    vp.offsetY = 20;
    expect(vp.pixelAt({ x: 10, y: 20 }, 64, 64)).toEqual({ y: 0, x: 0 });
    expect(vp.pixelAt({ x: 13.9, y: 21.9 }, 64, 64)).toEqual({ y: 0, x: 1 });
    expect(vp.pixelAt({ x: 9, y: 20 }, 64, 64)).toBeNull();
    expect(vp.pixelAt({ x: 10 + 128, y: 20 }, 64, 64)).toBeNull();
  });

  it("zoomAt keeps the anchor point fixed", () => {
    const vp = new Viewport();
    vp.fitTo(100, 100, 500, 500);
    const anchor = { x: 123, y: 245 };
    const before = vp.screenToImage(anchor);
    vp.zoomAt(anchor, 1.7);
    const after = vp.screenToImage(anchor);
    expect(Math.hypot(after.x - before.x, after.y - before.y)).toBeLessThan(1e-9);
  });

  it("maps mouse buttons to polarity", () => {
    expect(polarityForButton(0)).toBe(true);
    expect(polarityForButton(2)).toBe(false);
    expect(polarityForButton(1)).toBeNull();
  });
});
