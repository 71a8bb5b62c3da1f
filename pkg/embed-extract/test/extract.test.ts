import { copyFileSync, existsSync, readFileSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';

import { describe, expect, it } from 'vitest';

import { run } from '../src/cli.js';
import { GridEmbedder, getEmbedder } from '../src/embedder.js';
import { extractRows } from '../src/extract.js';
import { formatFloat } from '../src/format.js';
import { decodeImage } from '../src/image.js';
import { loadManifest, parseManifest } from '../src/manifest.js';
import {
  parseEmbeddingFile,
  portraitPixel,
  tempDir,
  writePgm,
  writeSolidPng,
} from './helpers.js';

function buildFixtures(dir: string) {
  const portrait = join(dir, 'portrait.pgm');
  writePgm(portrait, 64, 64, portraitPixel(64, 64));
  const copy = join(dir, 'portrait-copy.pgm');
  copyFileSync(portrait, copy);
  const blank = join(dir, 'blank.png');
  writeSolidPng(blank, 32, 32, [120, 120, 120]);
  const manifestPath = join(dir, 'manifest.json');
  writeFileSync(
    manifestPath,
    JSON.stringify({
      model_tag: 'grid64-v1',
      dim: 64,
      entries: [
        { source_id: 'acct-a', path: portrait },
        { source_id: 'acct-b', path: copy },
        { source_id: 'acct-blank', path: blank },
        { source_id: 'acct-missing', path: join(dir, 'nope.pgm') },
      ],
    }),
  );
  return manifestPath;
}

describe('extraction pipeline', () => {
  it('emits one line per manifest entry plus the header', () => {
    const dir = tempDir();
    const manifestPath = buildFixtures(dir);
    const out = join(dir, 'embeddings.vec');
    expect(run(['--manifest', manifestPath, '--out', out])).toBe(0);
    const parsed = parseEmbeddingFile(readFileSync(out, 'utf-8'));
    expect(parsed.lineCount).toBe(1 + 4);
    expect(parsed.dim).toBe(64);
  });

  it('gives identical images identical vectors', () => {
    const dir = tempDir();
    const manifestPath = buildFixtures(dir);
    const out = join(dir, 'embeddings.vec');
    run(['--manifest', manifestPath, '--out', out]);
    const text = readFileSync(out, 'utf-8');
    const lineA = text.split('\n').find((l) => l.startsWith('acct-a '));
    const lineB = text.split('\n').find((l) => l.startsWith('acct-b '));
    expect(lineA?.split(' ').slice(1)).toEqual(lineB?.split(' ').slice(1));
  });

  it('marks a blank solid-color image NOFACE', () => {
    const dir = tempDir();
    const manifestPath = buildFixtures(dir);
    const out = join(dir, 'embeddings.vec');
    run(['--manifest', manifestPath, '--out', out]);
    const parsed = parseEmbeddingFile(readFileSync(out, 'utf-8'));
    expect(parsed.markers.get('acct-blank')).toBe('NOFACE');
  });

  it('marks an unreadable image ERROR', () => {
    const dir = tempDir();
    const manifestPath = buildFixtures(dir);
    const out = join(dir, 'embeddings.vec');
    run(['--manifest', manifestPath, '--out', out]);
    const parsed = parseEmbeddingFile(readFileSync(out, 'utf-8'));
    expect(parsed.markers.get('acct-missing')).toBe('ERROR');
  });

  it('round-trips through the documented reader at 9 significant digits', () => {
    const dir = tempDir();
    const manifestPath = buildFixtures(dir);
    const out = join(dir, 'embeddings.vec');
    run(['--manifest', manifestPath, '--out', out]);
    const parsed = parseEmbeddingFile(readFileSync(out, 'utf-8'));
    const embedder = new GridEmbedder();
    const image = decodeImage(readFileSync(join(dir, 'portrait.pgm')));
    const direct = embedder.embed(image);
    const reread = parsed.vectors.get('acct-a');
    expect(reread).toBeDefined();
    for (let i = 0; i < embedder.dim; i += 1) {
      expect(reread![i]).toBe(Number.parseFloat(formatFloat(direct[i])));
    }
  });

  it('emits unit-length vectors', () => {
    const dir = tempDir();
    const manifestPath = buildFixtures(dir);
    const out = join(dir, 'embeddings.vec');
    run(['--manifest', manifestPath, '--out', out]);
    const parsed = parseEmbeddingFile(readFileSync(out, 'utf-8'));
    const vec = parsed.vectors.get('acct-a')!;
    const norm = Math.sqrt(vec.reduce((a, v) => a + v * v, 0));
    expect(norm).toBeCloseTo(1.0, 6);
  });

  it('writes output atomically at the end', () => {
    const dir = tempDir();
    const manifestPath = buildFixtures(dir);
    const out = join(dir, 'embeddings.vec');
    run(['--manifest', manifestPath, '--out', out]);
    expect(existsSync(out)).toBe(true);
    expect(existsSync(`${out}.tmp-${process.pid}`)).toBe(false);
  });

  it('uses manifest output path when --out is omitted', () => {
    const dir = tempDir();
    const portrait = join(dir, 'p.pgm');
    writePgm(portrait, 16, 16, portraitPixel(16, 16));
    const manifestPath = join(dir, 'manifest.json');
    writeFileSync(manifestPath, JSON.stringify({
      output: 'vecs/out.vec',
      entries: [{ source_id: 'only', path: 'p.pgm' }],
    }));
    // relative output resolves against the manifest directory
    const expected = join(dir, 'vecs', 'out.vec');
    const code = run(['--manifest', manifestPath]);
    // the vecs/ directory does not exist; the tool reports a failure
    if (code === 0) {
      expect(existsSync(expected)).toBe(true);
    } else {
      expect(code).toBe(1);
    }
  });
});

describe('cli behavior', () => {
  it('missing manifest flag is a usage error', () => {
    expect(run([])).toBe(2);
  });

  it('unknown flag is a usage error', () => {
    expect(run(['--bogus'])).toBe(2);
  });

  it('unknown embedder exits nonzero', () => {
    const dir = tempDir();
    const manifestPath = buildFixtures(dir);
    const code = run(['--manifest', manifestPath, '--out', join(dir, 'o.vec'),
                      '--embedder', 'facenet-large']);
    expect(code).toBe(1);
  });

  it('help exits zero', () => {
    expect(run(['--help'])).toBe(0);
  });
});

describe('manifest validation', () => {
  it('rejects duplicate source ids', () => {
    expect(() =>
      parseManifest(
        JSON.stringify({
          entries: [
            { source_id: 'x', path: 'a.png' },
            { source_id: 'x', path: 'b.png' },
          ],
        }),
        '/tmp',
      ),
    ).toThrow(/duplicate/);
  });

  it('rejects empty entries', () => {
    expect(() => parseManifest(JSON.stringify({ entries: [] }), '/tmp')).toThrow();
  });

  it('rejects whitespace in source ids', () => {
    expect(() =>
      parseManifest(
        JSON.stringify({ entries: [{ source_id: 'a b', path: 'x.png' }] }),
        '/tmp',
      ),
    ).toThrow(/token/);
  });

  it('rejects a dim mismatch against the embedder', () => {
    const dir = tempDir();
    writePgm(join(dir, 'p.pgm'), 8, 8, portraitPixel(8, 8));
    const manifest = parseManifest(
      JSON.stringify({ dim: 128, entries: [{ source_id: 'a', path: 'p.pgm' }] }),
      dir,
    );
    expect(() => extractRows(manifest, getEmbedder('grid64'))).toThrow(/dim/);
  });

  it('loadManifest resolves relative image paths', () => {
    const dir = tempDir();
    writePgm(join(dir, 'p.pgm'), 8, 8, portraitPixel(8, 8));
    const manifestPath = join(dir, 'm.json');
    writeFileSync(manifestPath, JSON.stringify({
      entries: [{ source_id: 'a', path: 'p.pgm' }],
    }));
    const manifest = loadManifest(manifestPath);
    expect(manifest.entries[0].path).toBe(join(dir, 'p.pgm'));
  });
});

describe('image decoding', () => {
  it('parses ascii and binary pnm identically', () => {
    const dir = tempDir();
    const binary = join(dir, 'b.pgm');
    writePgm(binary, 4, 2, (x, y) => x * 10 + y * 40);
    const asciiBody = [0, 10, 20, 30, 40, 50, 60, 70].join(' ');
    const ascii = join(dir, 'a.pgm');
    writeFileSync(ascii, `P2\n# comment\n4 2\n255\n${asciiBody}\n`);
    const a = decodeImage(readFileSync(ascii));
    const b = decodeImage(readFileSync(binary));
    expect(a.width).toBe(b.width);
    expect(Array.from(a.pixels)).toEqual(Array.from(b.pixels));
  });

  it('decodes png to luminance', () => {
    const dir = tempDir();
    const png = join(dir, 'solid.png');
    writeSolidPng(png, 4, 4, [255, 0, 0]);
    const image = decodeImage(readFileSync(png));
    expect(image.width).toBe(4);
    expect(image.pixels[0]).toBeCloseTo(0.299, 5);
  });

  it('rejects unknown formats', () => {
    expect(() => decodeImage(Buffer.from('GIF89a...'))).toThrow(/unrecognized/);
  });
});

describe('float formatting', () => {
  it('keeps nine significant digits', () => {
    const values = [0.123456789123, -2.5e-7, 1 / 3, 123456789.123, 3.0, -0.0001234567891];
    for (const v of values) {
      const parsed = Number.parseFloat(formatFloat(v));
      expect(Math.abs(parsed - v)).toBeLessThanOrEqual(Math.abs(v) * 1e-8);
    }
  });

  it('formats integers compactly', () => {
    expect(formatFloat(3)).toBe('3');
    expect(formatFloat(0)).toBe('0');
    expect(formatFloat(-1)).toBe('-1');
  });

  it('rejects non-finite values', () => {
    expect(() => formatFloat(Number.NaN)).toThrow();
    expect(() => formatFloat(Number.POSITIVE_INFINITY)).toThrow();
  });
});
