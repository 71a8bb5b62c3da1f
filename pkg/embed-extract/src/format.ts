/**
 * Embedding file emission. Format contract shared with the consumer:
 * header line `dim=<N>`, then one record per line, either
 * `<source_id> <N floats>` or `<source_id> NOFACE|ERROR`.
 * Floats carry 9 significant digits.
 */

export type VectorRow =
  | { sourceId: string; kind: 'vector'; values: number[] }
  | { sourceId: string; kind: 'noface' }
  | { sourceId: string; kind: 'error' };

/** Render a float with 9 significant digits, trailing zeros trimmed. */
export function formatFloat(value: number): string {
  if (!Number.isFinite(value)) {
    throw new Error(`non-finite embedding component: ${value}`);
  }
  if (Number.isInteger(value) && Math.abs(value) < 1e15) {
    return String(value);
  }
  let text = value.toPrecision(9);
  if (text.includes('e')) {
    let [mantissa, exponent] = text.split('e');
    if (mantissa.includes('.')) {
      mantissa = mantissa.replace(/0+$/, '').replace(/\.$/, '');
    }
    return `${mantissa}e${exponent}`;
  }
  if (text.includes('.')) {
    text = text.replace(/0+$/, '').replace(/\.$/, '');
  }
  return text;
}

export function renderLine(row: VectorRow): string {
  if (row.kind === 'noface') {
    return `${row.sourceId} NOFACE`;
  }
  if (row.kind === 'error') {
    return `${row.sourceId} ERROR`;
  }
  return `${row.sourceId} ${row.values.map(formatFloat).join(' ')}`;
}

export function renderEmbeddingFile(dim: number, rows: VectorRow[]): string {
  const lines = [`dim=${dim}`];
  for (const row of rows) {
    if (row.kind === 'vector' && row.values.length !== dim) {
      throw new Error(
        `${row.sourceId}: vector has ${row.values.length} components, expected ${dim}`,
      );
    }
    lines.push(renderLine(row));
  }
  return lines.join('\n') + '\n';
}
