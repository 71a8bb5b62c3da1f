/**
 * Extraction manifest: which images to embed and where the vectors go.
 *
 * JSON shape:
 *   {
 *     "model_tag": "grid64-v1",      // optional, must match the embedder
 *     "dim": 64,                      // optional, must match the embedder
 *     "output": "embeddings.vec",    // optional, --out overrides
 *     "entries": [ {"source_id": "acct-1", "path": "img/acct1.png"}, ... ]
 *   }
 */

import { readFileSync } from 'node:fs';
import { dirname, isAbsolute, resolve } from 'node:path';

export interface ManifestEntry {
  sourceId: string;
  path: string;
}

export interface Manifest {
  modelTag?: string;
  dim?: number;
  output?: string;
  entries: ManifestEntry[];
}

export function parseManifest(text: string, baseDir: string): Manifest {
  let payload: unknown;
  try {
    payload = JSON.parse(text);
  } catch (err) {
    throw new Error(`manifest is not valid JSON: ${(err as Error).message}`);
  }
  if (typeof payload !== 'object' || payload === null || Array.isArray(payload)) {
    throw new Error('manifest must be a JSON object');
  }
  const record = payload as Record<string, unknown>;
  const rawEntries = record['entries'];
  if (!Array.isArray(rawEntries) || rawEntries.length === 0) {
    throw new Error('manifest needs a nonempty "entries" array');
  }
  const seen = new Set<string>();
  const entries: ManifestEntry[] = rawEntries.map((item, index) => {
    if (typeof item !== 'object' || item === null) {
      throw new Error(`entry ${index} must be an object`);
    }
    const entry = item as Record<string, unknown>;
    const sourceId = entry['source_id'];
    const path = entry['path'];
    if (typeof sourceId !== 'string' || !sourceId || /\s/.test(sourceId)) {
      throw new Error(`entry ${index}: source_id must be a nonempty token`);
    }
    if (typeof path !== 'string' || !path) {
      throw new Error(`entry ${index}: path must be a nonempty string`);
    }
    if (seen.has(sourceId)) {
      throw new Error(`duplicate source_id: ${sourceId}`);
    }
    seen.add(sourceId);
    return {
      sourceId,
      path: isAbsolute(path) ? path : resolve(baseDir, path),
    };
  });
  const manifest: Manifest = { entries };
  if (record['model_tag'] !== undefined) {
    manifest.modelTag = String(record['model_tag']);
  }
  if (record['dim'] !== undefined) {
    const dim = Number(record['dim']);
    if (!Number.isInteger(dim) || dim < 1) {
      throw new Error(`manifest dim must be a positive integer, got ${record['dim']}`);
    }
    manifest.dim = dim;
  }
  if (record['output'] !== undefined) {
    const output = String(record['output']);
    manifest.output = isAbsolute(output) ? output : resolve(baseDir, output);
  }
  return manifest;
}

export function loadManifest(path: string): Manifest {
  const text = readFileSync(path, 'utf-8');
  return parseManifest(text, dirname(resolve(path)));
}
