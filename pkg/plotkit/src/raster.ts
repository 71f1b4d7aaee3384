/** Fixed-size RGB raster with the drawing primitives the renderers need. */

import { GLYPH_HEIGHT, GLYPH_WIDTH, glyphFor } from "./font.js";

export type Color = readonly [number, number, number];

export const WHITE: Color = [255, 255, 255];
export const BLACK: Color = [20, 20, 20];
export const GREY: Color = [150, 150, 150];
export const LIGHT_GREY: Color = [230, 230, 230];

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly pixels: Uint8Array;

  constructor(width: number, height: number, background: Color = WHITE) {
    this.width = width;
    this.height = height;
    this.pixels = new Uint8Array(width * height * 3);
    this.fillRect(0, 0, width, height, background);
  }

  set(x: number, y: number, color: Color): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 3;
    this.pixels[i] = color[0];
    this.pixels[i + 1] = color[1];
    this.pixels[i + 2] = color[2];
  }

  get(x: number, y: number): Color {
    const i = (y * this.width + x) * 3;
    return [this.pixels[i], this.pixels[i + 1], this.pixels[i + 2]];
  }

  fillRect(x0: number, y0: number, w: number, h: number, color: Color): void {
    const xMax = Math.min(this.width, x0 + w);
    const yMax = Math.min(this.height, y0 + h);
    for (let y = Math.max(0, y0); y < yMax; y++) {
      for (let x = Math.max(0, x0); x < xMax; x++) {
        this.set(x, y, color);
      }
    }
  }

  /**
   * Line between fractional endpoints; `dash` alternates [on, off] pixel
   * lengths, `phase` carries the pattern across connected segments.
   */
  line(
    x0: number,
    y0: number,
    x1: number,
    y1: number,
    color: Color,
    thickness = 1,
    dash?: readonly [number, number],
    phase = 0,
  ): number {
    const steps = Math.max(Math.abs(x1 - x0), Math.abs(y1 - y0), 1);
    const n = Math.ceil(steps);
    const period = dash ? dash[0] + dash[1] : 1;
    let travelled = phase;
    const stepLen = Math.hypot(x1 - x0, y1 - y0) / n;
    for (let i = 0; i <= n; i++) {
      const t = i / n;
      const visible = !dash || travelled % period < dash[0];
      if (visible) {
        const cx = Math.round(x0 + (x1 - x0) * t);
        const cy = Math.round(y0 + (y1 - y0) * t);
        const r = Math.floor(thickness / 2);
        for (let dy = -r; dy <= thickness - 1 - r; dy++) {
          for (let dx = -r; dx <= thickness - 1 - r; dx++) {
            this.set(cx + dx, cy + dy, color);
          }
        }
      }
      travelled += stepLen;
    }
    return travelled;
  }

  text(x: number, y: number, content: string, color: Color, scale = 2): void {
    let cursor = x;
    for (const ch of content) {
      const glyph = glyphFor(ch);
      for (let col = 0; col < GLYPH_WIDTH; col++) {
        for (let row = 0; row < GLYPH_HEIGHT; row++) {
          if ((glyph[col] >> row) & 1) {
            this.fillRect(cursor + col * scale, y + row * scale, scale, scale, color);
          }
        }
      }
      cursor += (GLYPH_WIDTH + 1) * scale;
    }
  }

  /** Vertical text running bottom-to-top (for y-axis titles). */
  textVertical(x: number, y: number, content: string, color: Color, scale = 2): void {
    let cursor = y;
    for (const ch of content) {
      const glyph = glyphFor(ch);
      for (let col = 0; col < GLYPH_WIDTH; col++) {
        for (let row = 0; row < GLYPH_HEIGHT; row++) {
          if ((glyph[col] >> row) & 1) {
            // rotate 90 degrees counter-clockwise
            this.fillRect(x + row * scale, cursor - col * scale, scale, scale, color);
          }
        }
      }
      cursor -= (GLYPH_WIDTH + 1) * scale;
    }
  }
}

export function textWidth(content: string, scale = 2): number {
  return content.length * (GLYPH_WIDTH + 1) * scale;
}
