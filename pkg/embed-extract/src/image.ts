/**
 * Image decoding to a grayscale pixel grid. PPM/PGM (P2/P3/P5/P6) are parsed
 * natively; PNG goes through pngjs. Luminance uses the Rec. 601 weights and
 * lands in [0, 1].
 */

import { PNG } from 'pngjs';

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major luminance in [0, 1]. */
  pixels: Float64Array;
}

const LUMA_R = 0.299;
const LUMA_G = 0.587;
const LUMA_B = 0.114;

class TokenReader {
  private pos = 0;

  constructor(private readonly data: Buffer) {}

  /** Next whitespace-delimited token, skipping `#` comments. */
  next(): string {
    while (this.pos < this.data.length) {
      const ch = this.data[this.pos];
      if (ch === 0x23) {
        while (this.pos < this.data.length && this.data[this.pos] !== 0x0a) {
          this.pos += 1;
        }
      } else if (ch === 0x20 || ch === 0x09 || ch === 0x0a || ch === 0x0d) {
        this.pos += 1;
      } else {
        break;
      }
    }
    const start = this.pos;
    while (this.pos < this.data.length && !isSpace(this.data[this.pos])) {
      this.pos += 1;
    }
    if (start === this.pos) {
      throw new Error('unexpected end of PNM header');
    }
    return this.data.subarray(start, this.pos).toString('ascii');
  }

  nextInt(): number {
    const token = this.next();
    const value = Number.parseInt(token, 10);
    if (!Number.isInteger(value) || value < 0) {
      throw new Error(`bad PNM header token: ${token}`);
    }
    return value;
  }

  /** Byte offset just past the single whitespace after the header. */
  binaryStart(): number {
    return this.pos + 1;
  }

  readAsciiSamples(count: number): number[] {
    const out = new Array<number>(count);
    for (let i = 0; i < count; i += 1) {
      out[i] = this.nextInt();
    }
    return out;
  }
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}

function decodePnm(data: Buffer): GrayImage {
  const reader = new TokenReader(data);
  const magic = reader.next();
  if (!['P2', 'P3', 'P5', 'P6'].includes(magic)) {
    throw new Error(`unsupported PNM magic: ${magic}`);
  }
  const width = reader.nextInt();
  const height = reader.nextInt();
  const maxval = reader.nextInt();
  if (maxval <= 0 || maxval > 255) {
    throw new Error(`unsupported PNM maxval: ${maxval}`);
  }
  const channels = magic === 'P3' || magic === 'P6' ? 3 : 1;
  const count = width * height * channels;
  let samples: number[] | Buffer;
  if (magic === 'P2' || magic === 'P3') {
    samples = reader.readAsciiSamples(count);
  } else {
    const start = reader.binaryStart();
    if (data.length < start + count) {
      throw new Error('truncated PNM payload');
    }
    samples = data.subarray(start, start + count);
  }
  const pixels = new Float64Array(width * height);
  for (let i = 0; i < width * height; i += 1) {
    if (channels === 1) {
      pixels[i] = samples[i * channels] / maxval;
    } else {
      const r = samples[i * 3] / maxval;
      const g = samples[i * 3 + 1] / maxval;
      const b = samples[i * 3 + 2] / maxval;
      pixels[i] = LUMA_R * r + LUMA_G * g + LUMA_B * b;
    }
  }
  return { width, height, pixels };
}

function decodePng(data: Buffer): GrayImage {
  const png = PNG.sync.read(data);
  const pixels = new Float64Array(png.width * png.height);
  for (let i = 0; i < png.width * png.height; i += 1) {
    const r = png.data[i * 4] / 255;
    const g = png.data[i * 4 + 1] / 255;
    const b = png.data[i * 4 + 2] / 255;
    pixels[i] = LUMA_R * r + LUMA_G * g + LUMA_B * b;
  }
  return { width: png.width, height: png.height, pixels };
}

const PNG_SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47]);

export function decodeImage(data: Buffer): GrayImage {
  if (data.length === 0) {
    throw new Error('empty image file');
  }
  if (data.subarray(0, 4).equals(PNG_SIGNATURE)) {
    return decodePng(data);
  }
  if (data[0] === 0x50 /* 'P' */) {
    return decodePnm(data);
  }
  throw new Error('unrecognized image format (PNG or PNM expected)');
}
