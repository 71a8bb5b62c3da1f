#!/usr/bin/env node
/**
 * embed-extract --manifest <file> --out embeddings.vec [--embedder grid64]
 *
 * Exit codes: 0 success, 1 extraction/embedder failure, 2 usage error.
 */

import { pathToFileURL } from 'node:url';

import { getEmbedder, knownEmbedders } from './embedder.js';
import { runExtraction } from './extract.js';
import { loadManifest } from './manifest.js';

interface CliArgs {
  manifest?: string;
  out?: string;
  embedder: string;
}

export function parseArgs(argv: string[]): CliArgs {
  const args: CliArgs = { embedder: 'grid64' };
  for (let i = 0; i < argv.length; i += 1) {
    const flag = argv[i];
    const take = (): string => {
      const value = argv[i + 1];
      if (value === undefined) {
        throw new UsageError(`${flag} needs a value`);
      }
      i += 1;
      return value;
    };
    switch (flag) {
      case '--manifest':
        args.manifest = take();
        break;
      case '--out':
        args.out = take();
        break;
      case '--embedder':
        args.embedder = take();
        break;
      case '--help':
      case '-h':
        throw new HelpRequested();
      default:
        throw new UsageError(`unknown flag: ${flag}`);
    }
  }
  return args;
}

export class UsageError extends Error {}
export class HelpRequested extends Error {}

const USAGE = `usage: embed-extract --manifest <file> --out <embeddings.vec> [--embedder <name>]
known embedders: ${knownEmbedders().join(', ')}`;

export function run(argv: string[]): number {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    if (err instanceof HelpRequested) {
      console.log(USAGE);
      return 0;
    }
    console.error(`error: ${(err as Error).message}`);
    console.error(USAGE);
    return 2;
  }
  if (!args.manifest) {
    console.error('error: --manifest is required');
    console.error(USAGE);
    return 2;
  }
  try {
    const manifest = loadManifest(args.manifest);
    const outPath = args.out ?? manifest.output;
    if (!outPath) {
      console.error('error: no output path (--out or manifest "output")');
      return 2;
    }
    const embedder = getEmbedder(args.embedder);
    const counts = runExtraction(manifest, embedder, outPath);
    console.log(
      `wrote ${outPath}: ${counts.vectors} vectors, ${counts.noface} NOFACE, ` +
        `${counts.errors} ERROR (model ${embedder.modelTag}, dim ${embedder.dim})`,
    );
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;

if (invokedDirectly) {
  process.exit(run(process.argv.slice(2)));
}
