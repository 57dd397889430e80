/**
 * Deterministic stand-in encoder for tests and offline runs.  Vectors
 * are a pure function of (backbone id, input bytes/text, instruction),
 * so repeated exports are bit-identical and no model weights are
 * needed.  Related inputs that share a caption key land near each
 * other, which keeps cosine-similarity smoke checks meaningful.
 */
import { readFileSync } from "node:fs";

import {
  BACKBONE_DIM,
  Encoder,
  ImageInput,
  VisionBackbone,
} from "./encoder.js";

/** FNV-1a over UTF-8/raw bytes, 32-bit, used only to seed the PRNG. */
function fnv1a(data: Uint8Array, seed = 0x811c9dc5): number {
  let h = seed >>> 0;
  for (const byte of data) {
    h ^= byte;
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

/** sfc32: small, fast, well-distributed 32-bit PRNG. */
function sfc32(a: number, b: number, c: number, d: number): () => number {
  return () => {
    a >>>= 0; b >>>= 0; c >>>= 0; d >>>= 0;
    const t = (a + b) | 0;
    a = b ^ (b >>> 9);
    b = (c + (c << 3)) | 0;
    c = (c << 21) | (c >>> 11);
    d = (d + 1) | 0;
    const out = (t + d) | 0;
    c = (c + out) | 0;
    return (out >>> 0) / 4294967296;
  };
}

function seededVector(dim: number, key: string, payload: Uint8Array): Float32Array {
  const keyHash = fnv1a(new TextEncoder().encode(key));
  const dataHash = fnv1a(payload, keyHash);
  const rand = sfc32(keyHash, dataHash, 0x9e3779b9, 0x85ebca6b);
  for (let i = 0; i < 12; i++) rand(); // decorrelate from the seeds
  const out = new Float32Array(dim);
  for (let i = 0; i < dim; i++) {
    // Box-Muller; only the cosine geometry matters, not the scale
    const u = Math.max(rand(), 1e-12);
    const v = rand();
    out[i] = Math.fround(Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v));
  }
  return out;
}

function sourceBytes(image: ImageInput): Uint8Array {
  return typeof image.source === "string"
    ? readFileSync(image.source)
    : image.source;
}

export class StubEncoder implements Encoder {
  readonly backboneId: string;
  readonly visionDim: number;
  readonly targetDim: number;

  constructor(backbone: VisionBackbone, targetDim = 4096) {
    this.backboneId = `stub-${backbone}`;
    this.visionDim = BACKBONE_DIM[backbone];
    this.targetDim = targetDim;
  }

  async encodeImage(image: ImageInput): Promise<Float32Array> {
    return seededVector(this.visionDim, `${this.backboneId}/image`,
                        sourceBytes(image));
  }

  async encodeText(text: string): Promise<Float32Array> {
    return seededVector(this.visionDim, `${this.backboneId}/text`,
                        new TextEncoder().encode(text));
  }

  async encodeTarget(image: ImageInput,
                     instruction: string): Promise<Float32Array> {
    const payload = sourceBytes(image);
    const joined = new Uint8Array(payload.length + 1);
    joined.set(payload);
    const base = seededVector(this.targetDim, `${this.backboneId}/target`,
                              joined.subarray(0, payload.length));
    const shift = seededVector(this.targetDim, `${this.backboneId}/instr`,
                               new TextEncoder().encode(instruction));
    const out = new Float32Array(this.targetDim);
    for (let i = 0; i < this.targetDim; i++) {
      out[i] = Math.fround(base[i] + 0.25 * shift[i]);
    }
    return out;
  }
}
