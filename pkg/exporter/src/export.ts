import { readFileSync, writeFileSync } from "node:fs";

import { Checkpoint, encodeSentence } from "./encoder";

export class InputFormatError extends Error {}

export interface SentenceRecord {
  id: string;
  text: string;
}

export interface ExportOptions {
  /** Sentences encoded per batch (sequential; result-identical for any size). */
  batch?: number;
  /** Pool over the begin/end markers too (default: excluded). */
  includeSpecialTokens?: boolean;
}

export interface ExportReport {
  written: number;
  skipped: string[];
  outputPath: string;
  /** Path of the skip log, or null when nothing was skipped. */
  sidecarPath: string | null;
}

/** Parse "<id>\t<text>" lines; blank lines are ignored. */
export function parseSentenceFile(text: string): SentenceRecord[] {
  const records: SentenceRecord[] = [];
  const seen = new Set<string>();
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].replace(/\r$/, "");
    if (line.trim() === "") {
      continue;
    }
    const tab = line.indexOf("\t");
    if (tab <= 0) {
      throw new InputFormatError(`line ${i + 1}: expected '<sentence_id>\\t<text>', got ${JSON.stringify(line)}`);
    }
    const id = line.slice(0, tab);
    if (seen.has(id)) {
      throw new InputFormatError(`line ${i + 1}: duplicate sentence id '${id}'`);
    }
    seen.add(id);
    records.push({ id, text: line.slice(tab + 1) });
  }
  return records;
}

/** One vector component with 9 significant digits, shortest spelling. */
export function formatComponent(v: number): string {
  if (!Number.isFinite(v)) {
    throw new Error(`non-finite vector component: ${v}`);
  }
  if (v === 0) {
    return "0";
  }
  const s = v.toPrecision(9);
  if (s.includes("e")) {
    const [mantissa, exponent] = s.split("e");
    const trimmed = mantissa.includes(".")
      ? mantissa.replace(/0+$/, "").replace(/\.$/, "")
      : mantissa;
    return `${trimmed}e${exponent}`;
  }
  if (s.includes(".")) {
    return s.replace(/0+$/, "").replace(/\.$/, "");
  }
  return s;
}

/**
 * Encode every non-empty sentence and render the embedding file:
 * a "#dim=<d>\t#provenance=<string>" header, then one "<id>\t<components>"
 * row per sentence in lexicographic id order.
 */
export function buildEmbeddingFile(
  ckpt: Checkpoint,
  records: SentenceRecord[],
  opts: ExportOptions = {}
): { text: string; skipped: string[] } {
  const batch = opts.batch ?? 32;
  if (!Number.isInteger(batch) || batch < 1) {
    throw new InputFormatError(`batch must be a positive integer, got ${batch}`);
  }
  const includeSpecial = opts.includeSpecialTokens ?? false;

  const skipped: string[] = [];
  const encodable: SentenceRecord[] = [];
  for (const record of records) {
    if (record.text.trim() === "") {
      skipped.push(record.id);
    } else {
      encodable.push(record);
    }
  }

  const vectors = new Map<string, Float64Array>();
  for (let start = 0; start < encodable.length; start += batch) {
    for (const record of encodable.slice(start, start + batch)) {
      vectors.set(record.id, encodeSentence(ckpt, record.text, includeSpecial));
    }
  }

  const provenance =
    `${ckpt.name}, mean pooling over final-layer token states ` +
    `(special tokens ${includeSpecial ? "included" : "excluded"})`;
  const out = [`#dim=${ckpt.dim}\t#provenance=${provenance}`];
  for (const id of [...vectors.keys()].sort()) {
    const components = Array.from(vectors.get(id)!, formatComponent).join(" ");
    out.push(`${id}\t${components}`);
  }
  return { text: out.join("\n") + "\n", skipped };
}

/**
 * Read a sentence file, encode it, and write the embedding file. Empty
 * sentences are skipped with a warning and listed in "<output>.log".
 */
export function exportEmbeddings(
  ckpt: Checkpoint,
  inputPath: string,
  outputPath: string,
  opts: ExportOptions = {}
): ExportReport {
  const records = parseSentenceFile(readFileSync(inputPath, "utf8"));
  const { text, skipped } = buildEmbeddingFile(ckpt, records, opts);
  writeFileSync(outputPath, text);

  let sidecarPath: string | null = null;
  if (skipped.length > 0) {
    sidecarPath = `${outputPath}.log`;
    writeFileSync(
      sidecarPath,
      skipped.map((id) => `skipped\t${id}\tempty sentence\n`).join("")
    );
    for (const id of skipped) {
      console.warn(`warning: skipped '${id}': empty sentence`);
    }
  }
  return {
    written: records.length - skipped.length,
    skipped,
    outputPath,
    sidecarPath,
  };
}
