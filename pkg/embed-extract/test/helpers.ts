import { mkdtempSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { PNG } from 'pngjs';

export function tempDir(): string {
  return mkdtempSync(join(tmpdir(), 'embed-extract-'));
}

/** Binary grayscale PGM (P5), pixel callback returns 0..255. */
export function writePgm(
  path: string,
  width: number,
  height: number,
  pixel: (x: number, y: number) => number,
): void {
  const header = Buffer.from(`P5\n${width} ${height}\n255\n`, 'ascii');
  const body = Buffer.alloc(width * height);
  for (let y = 0; y < height; y += 1) {
    for (let x = 0; x < width; x += 1) {
      body[y * width + x] = pixel(x, y) & 0xff;
    }
  }
  writeFileSync(path, Buffer.concat([header, body]));
}

/** Solid-color RGB PNG. */
export function writeSolidPng(path: string, width: number, height: number,
                              rgb: [number, number, number]): void {
  const png = new PNG({ width, height });
  for (let i = 0; i < width * height; i += 1) {
    png.data[i * 4] = rgb[0];
    png.data[i * 4 + 1] = rgb[1];
    png.data[i * 4 + 2] = rgb[2];
    png.data[i * 4 + 3] = 255;
  }
  writeFileSync(path, PNG.sync.write(png));
}

/** A synthetic "portrait": bright centered oval on a dark background. */
export function portraitPixel(width: number, height: number) {
  return (x: number, y: number): number => {
    const dx = (x - width / 2) / (width / 3);
    const dy = (y - height / 2) / (height / 2.2);
    return dx * dx + dy * dy < 1 ? 210 : 28;
  };
}

export interface ParsedEmbeddingFile {
  dim: number;
  vectors: Map<string, number[]>;
  markers: Map<string, string>;
  lineCount: number;
}

/**
 * Reference parser mirroring the consumer's documented reading rules:
 * `dim=<N>` header, `<id> <N floats>` records, NOFACE/ERROR markers.
 */
export function parseEmbeddingFile(text: string): ParsedEmbeddingFile {
  const lines = text.split('\n').filter((line) => line.length > 0);
  const header = lines[0];
  if (!header?.startsWith('dim=')) {
    throw new Error(`missing dim= header: ${header}`);
  }
  const dim = Number.parseInt(header.slice(4), 10);
  if (!Number.isInteger(dim) || dim < 1) {
    throw new Error(`bad dim header: ${header}`);
  }
  const vectors = new Map<string, number[]>();
  const markers = new Map<string, string>();
  for (const line of lines.slice(1)) {
    const parts = line.split(/\s+/);
    const id = parts[0];
    if (parts.length === 2 && (parts[1] === 'NOFACE' || parts[1] === 'ERROR')) {
      markers.set(id, parts[1]);
      continue;
    }
    if (parts.length - 1 !== dim) {
      throw new Error(`expected ${dim} components, got ${parts.length - 1}`);
    }
    const values = parts.slice(1).map((token) => {
      const value = Number.parseFloat(token);
      if (!Number.isFinite(value)) {
        throw new Error(`non-numeric component: ${token}`);
      }
      return value;
    });
    vectors.set(id, values);
  }
  return { dim, vectors, markers, lineCount: lines.length };
}
