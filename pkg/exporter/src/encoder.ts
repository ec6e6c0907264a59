import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";

/** Markers framing every tokenized sentence. */
export const BOS = "<s>";
export const EOS = "</s>";

export interface Checkpoint {
  /** How the model was named on the command line (registry id or path). */
  ref: string;
  /** Checkpoint name recorded in the output provenance. */
  name: string;
  /** Hidden size of the encoder = dimension of every exported vector. */
  dim: number;
  /** Keys the state generator, so different checkpoints disagree. */
  salt: string;
}

export class CheckpointLoadError extends Error {}

const REGISTRY: Record<string, { name: string; dim: number }> = {
  "multilingual-base": { name: "multilingual-base", dim: 768 },
  "multilingual-large": { name: "multilingual-large", dim: 1024 },
};

/**
 * Resolve a model reference: a registry id, or a path to a descriptor file
 * ({"name", "dim", optional "salt"}) for locally produced checkpoints.
 */
export function loadCheckpoint(ref: string): Checkpoint {
  const known = REGISTRY[ref];
  if (known) {
    return { ref, name: known.name, dim: known.dim, salt: known.name };
  }

  let text: string;
  try {
    text = readFileSync(ref, "utf8");
  } catch {
    throw new CheckpointLoadError(
      `unknown checkpoint '${ref}': not one of [${Object.keys(REGISTRY).join(", ")}] and not a readable descriptor file`
    );
  }
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch {
    throw new CheckpointLoadError(`checkpoint descriptor '${ref}' is not valid JSON`);
  }
  if (typeof parsed !== "object" || parsed === null) {
    throw new CheckpointLoadError(`checkpoint descriptor '${ref}' must be a JSON object`);
  }
  const { name, dim, salt } = parsed as { name?: unknown; dim?: unknown; salt?: unknown };
  if (typeof name !== "string" || name.length === 0) {
    throw new CheckpointLoadError(`checkpoint descriptor '${ref}' needs a non-empty string "name"`);
  }
  if (typeof dim !== "number" || !Number.isInteger(dim) || dim < 1) {
    throw new CheckpointLoadError(`checkpoint descriptor '${ref}' needs a positive integer "dim"`);
  }
  if (salt !== undefined && typeof salt !== "string") {
    throw new CheckpointLoadError(`checkpoint descriptor '${ref}': "salt" must be a string`);
  }
  return { ref, name, dim, salt: salt ?? name };
}

/** Whitespace tokens framed by the begin/end markers. */
export function tokenize(text: string): string[] {
  return [BOS, ...text.split(/\s+/).filter(Boolean), EOS];
}

/**
 * Final-layer state for one token at one position: dim floats in [-1, 1),
 * a pure function of (checkpoint salt, token, position) expanded from
 * SHA-256 digests, 8 components per digest.
 */
export function tokenState(ckpt: Checkpoint, token: string, position: number): Float64Array {
  const state = new Float64Array(ckpt.dim);
  const blocks = Math.ceil(ckpt.dim / 8);
  let k = 0;
  for (let block = 0; block < blocks; block++) {
    const digest = createHash("sha256")
      .update(`${ckpt.salt}\u0000${token}\u0000${position}\u0000${block}`)
      .digest();
    for (let i = 0; i < 8 && k < ckpt.dim; i++, k++) {
      state[k] = (digest.readUInt32BE(i * 4) / 2 ** 32) * 2 - 1;
    }
  }
  return state;
}

/**
 * Arithmetic mean of the token states of one sentence. The begin/end
 * markers are left out of the mean unless includeSpecialTokens is set, so
 * a single-token sentence pools to exactly that token's state.
 */
export function encodeSentence(
  ckpt: Checkpoint,
  text: string,
  includeSpecialTokens = false
): Float64Array {
  const tokens = tokenize(text);
  const pooled = new Float64Array(ckpt.dim);
  let count = 0;
  for (let pos = 0; pos < tokens.length; pos++) {
    const isMarker = pos === 0 || pos === tokens.length - 1;
    if (isMarker && !includeSpecialTokens) {
      continue;
    }
    const state = tokenState(ckpt, tokens[pos], pos);
    for (let j = 0; j < ckpt.dim; j++) {
      pooled[j] += state[j];
    }
    count++;
  }
  if (count === 0) {
    throw new Error(`sentence has no tokens to pool: ${JSON.stringify(text)}`);
  }
  for (let j = 0; j < ckpt.dim; j++) {
    pooled[j] /= count;
  }
  return pooled;
}
