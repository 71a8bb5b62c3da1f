/**
 * Batch extraction: decode each manifest entry, run the embedder, and write
 * the embedding file atomically (temp file + rename) once every entry has a
 * line. Images with no detectable subject get a NOFACE marker; unreadable or
 * undecodable files get ERROR.
 */

import { readFileSync, renameSync, writeFileSync } from 'node:fs';

import type { Embedder } from './embedder.js';
import { decodeImage } from './image.js';
import type { Manifest } from './manifest.js';
import { renderEmbeddingFile, type VectorRow } from './format.js';

export interface ExtractionCounts {
  vectors: number;
  noface: number;
  errors: number;
}

export interface ExtractionResult {
  rows: VectorRow[];
  counts: ExtractionCounts;
}

export function extractRows(manifest: Manifest, embedder: Embedder): ExtractionResult {
  if (manifest.modelTag !== undefined && manifest.modelTag !== embedder.modelTag) {
    throw new Error(
      `manifest model_tag ${manifest.modelTag} does not match embedder ${embedder.modelTag}`,
    );
  }
  if (manifest.dim !== undefined && manifest.dim !== embedder.dim) {
    throw new Error(`manifest dim ${manifest.dim} does not match embedder dim ${embedder.dim}`);
  }
  const rows: VectorRow[] = [];
  const counts: ExtractionCounts = { vectors: 0, noface: 0, errors: 0 };
  for (const entry of manifest.entries) {
    let row: VectorRow;
    try {
      const image = decodeImage(readFileSync(entry.path));
      if (embedder.detectFace(image)) {
        const values = embedder.embed(image);
        if (values.length !== embedder.dim) {
          throw new Error(
            `embedder returned ${values.length} components, declared dim ${embedder.dim}`,
          );
        }
        row = { sourceId: entry.sourceId, kind: 'vector', values };
      } else {
        row = { sourceId: entry.sourceId, kind: 'noface' };
      }
    } catch {
      row = { sourceId: entry.sourceId, kind: 'error' };
    }
    rows.push(row);
    if (row.kind === 'vector') counts.vectors += 1;
    else if (row.kind === 'noface') counts.noface += 1;
    else counts.errors += 1;
  }
  return { rows, counts };
}

export function writeEmbeddingFile(path: string, dim: number, rows: VectorRow[]): void {
  const text = renderEmbeddingFile(dim, rows);
  const tmp = `${path}.tmp-${process.pid}`;
  writeFileSync(tmp, text, 'utf-8');
  renameSync(tmp, path);
}

export function runExtraction(
  manifest: Manifest,
  embedder: Embedder,
  outPath: string,
): ExtractionCounts {
  const { rows, counts } = extractRows(manifest, embedder);
  writeEmbeddingFile(outPath, embedder.dim, rows);
  return counts;
}
