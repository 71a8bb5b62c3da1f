/**
 * Embedder contract and the built-in reference implementation.
 *
 * Any face model plugs in behind two functions: detectFace decides whether
 * the image holds a usable subject, embed produces a fixed-dimension vector.
 * The bundled grid64 embedder is a deterministic luminance-grid descriptor:
 * it gives identical images identical vectors and rejects flat/solid images,
 * which is what the pipeline contract needs. Distances in its space are not
 * calibrated like a trained face model's; recalibrate thresholds per model.
 */

import type { GrayImage } from './image.js';

export interface Embedder {
  readonly modelTag: string;
  readonly dim: number;
  detectFace(image: GrayImage): boolean;
  embed(image: GrayImage): number[];
}

const GRID = 8;
const MIN_LUMINANCE_STDDEV = 0.02;

function luminanceStdDev(image: GrayImage): number {
  const n = image.pixels.length;
  if (n === 0) {
    return 0;
  }
  let sum = 0;
  for (let i = 0; i < n; i += 1) {
    sum += image.pixels[i];
  }
  const mean = sum / n;
  let variance = 0;
  for (let i = 0; i < n; i += 1) {
    const d = image.pixels[i] - mean;
    variance += d * d;
  }
  return Math.sqrt(variance / n);
}

export class GridEmbedder implements Embedder {
  readonly modelTag = 'grid64-v1';
  readonly dim = GRID * GRID;

  detectFace(image: GrayImage): boolean {
    return luminanceStdDev(image) >= MIN_LUMINANCE_STDDEV;
  }

  embed(image: GrayImage): number[] {
    const means = new Array<number>(this.dim).fill(0);
    const counts = new Array<number>(this.dim).fill(0);
    for (let y = 0; y < image.height; y += 1) {
      const gy = Math.min(GRID - 1, Math.floor((y * GRID) / image.height));
      for (let x = 0; x < image.width; x += 1) {
        const gx = Math.min(GRID - 1, Math.floor((x * GRID) / image.width));
        const cell = gy * GRID + gx;
        means[cell] += image.pixels[y * image.width + x];
        counts[cell] += 1;
      }
    }
    for (let i = 0; i < this.dim; i += 1) {
      means[i] = counts[i] > 0 ? means[i] / counts[i] : 0;
    }
    const mean = means.reduce((a, b) => a + b, 0) / this.dim;
    const centered = means.map((v) => v - mean);
    const norm = Math.sqrt(centered.reduce((a, v) => a + v * v, 0));
    if (norm === 0) {
      // Per-cell means are identical; fall back to a fixed direction so the
      // output stays deterministic and unit-length.
      return new Array<number>(this.dim).fill(1 / Math.sqrt(this.dim));
    }
    return centered.map((v) => v / norm);
  }
}

const REGISTRY: Record<string, () => Embedder> = {
  grid64: () => new GridEmbedder(),
};

export function getEmbedder(name: string): Embedder {
  const factory = REGISTRY[name];
  if (!factory) {
    throw new Error(
      `embedder '${name}' is not available; known: ${Object.keys(REGISTRY).join(', ')}`,
    );
  }
  return factory();
}

export function knownEmbedders(): string[] {
  return Object.keys(REGISTRY);
}
