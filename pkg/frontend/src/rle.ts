/**
 * Run-length mask codec matching the session service payloads.
 *
 * Counts are row-major run lengths alternating starting with background;
 * they must sum to height * width.
 */

export interface RleMask {
  height: number;
  width: number;
  counts: number[];
}

/** Decode to a flat Uint8Array (row-major, 1 = foreground). */
export function decodeRle(rle: RleMask): Uint8Array {
  const total = rle.height * rle.width;
  const out = new Uint8Array(total);
  let pos = 0;
  let value = 0;
  for (const count of rle.counts) {
    if (count < 0) {
      throw new Error(`negative run length ${count}`);
    }
    if (value === 1) {
      out.fill(1, pos, pos + count);
    }
    pos += count;
    value ^= 1;
  }
  if (pos !== total) {
    throw new Error(`run lengths sum to ${pos}, expected ${total}`);
  }
  return out;
}

/** Encode a flat mask; used by tests to verify lossless round-trips. */
export function encodeRle(mask: Uint8Array, height: number, width: number): RleMask {
  if (mask.length !== height * width) {
    throw new Error(`mask length ${mask.length} != ${height}x${width}`);
  }
  const counts: number[] = [];
  let value = 0;
  let run = 0;
  for (const pixel of mask) {
    const bit = pixel ? 1 : 0;
    if (bit === value) {
      run += 1;
    } else {
      counts.push(run);
      value = bit;
      run = 1;
    }
  }
  counts.push(run);
  return { height, width, counts };
}

/**
 * Expand a decoded mask into premultiplied RGBA bytes for canvas
 * compositing; background pixels stay fully transparent.
 */
export function maskToRgba(mask: Uint8Array, rgb: [number, number, number],
                           alpha: number): Uint8ClampedArray {
  const out = new Uint8ClampedArray(mask.length * 4);
  const a = Math.round(alpha * 255);
  for (let i = 0; i < mask.length; i++) {
    if (mask[i]) {
      const j = i * 4;
      out[j] = rgb[0];
      out[j + 1] = rgb[1];
      out[j + 2] = rgb[2];
      out[j + 3] = a;
    }
  }
  return out;
}
