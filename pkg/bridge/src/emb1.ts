/**
 * The EMB1 binary embedding-store format, bit-exact with the Python
 * toolkit's reader/writer.  All integers little-endian:
 *
 *   magic "EMB1" | version u16 = 1 | space_tag u8 | dim u32 | count u64
 *   | metadata: entry count u16, then per entry
 *       (key len u16, key bytes, value len u32, value bytes)
 *   | records: per record
 *       (id len u16, id bytes, label i32, group len u16, group bytes,
 *        dim x float32)
 */

export const MAGIC = "EMB1";
export const FORMAT_VERSION = 1;
export const UNLABELED = -1;

export enum SpaceTag {
  visual = 0,
  textual = 1,
  llm_target = 2,
}

export interface EmbeddingRecord {
  id: string;
  vector: Float32Array;
  label?: number;
  group?: string;
}

export interface Emb1Store {
  dim: number;
  spaceTag: SpaceTag;
  records: EmbeddingRecord[];
  metadata: Record<string, string>;
}

export class StoreFormatError extends Error {
  readonly code: string;
  constructor(message: string, code: string) {
    super(message);
    this.name = "StoreFormatError";
    this.code = code;
  }
}

export function validateStore(store: Emb1Store): void {
  if (!Number.isInteger(store.dim) || store.dim <= 0) {
    throw new StoreFormatError("dim must be positive", "dim-mismatch");
  }
  const seen = new Set<string>();
  for (const rec of store.records) {
    if (rec.vector.length !== store.dim) {
      throw new StoreFormatError(
        `record ${JSON.stringify(rec.id)} has length ${rec.vector.length}, ` +
          `store dim is ${store.dim}`,
        "dim-mismatch",
      );
    }
    for (const x of rec.vector) {
      if (!Number.isFinite(x)) {
        throw new StoreFormatError(
          `record ${JSON.stringify(rec.id)} contains a non-finite component`,
          "non-finite",
        );
      }
    }
    if (seen.has(rec.id)) {
      throw new StoreFormatError(
        `duplicate record id ${JSON.stringify(rec.id)}`,
        "duplicate-id",
      );
    }
    seen.add(rec.id);
  }
}

class ByteWriter {
  private chunks: Buffer[] = [];

  raw(b: Buffer): void {
    this.chunks.push(b);
  }

  u16(v: number): void {
    const b = Buffer.alloc(2);
    b.writeUInt16LE(v);
    this.raw(b);
  }

  u32(v: number): void {
    const b = Buffer.alloc(4);
    b.writeUInt32LE(v);
    this.raw(b);
  }

  i32(v: number): void {
    const b = Buffer.alloc(4);
    b.writeInt32LE(v);
    this.raw(b);
  }

  u64(v: number): void {
    const b = Buffer.alloc(8);
    b.writeBigUInt64LE(BigInt(v));
    this.raw(b);
  }

  str16(s: string): void {
    const raw = Buffer.from(s, "utf-8");
    if (raw.length > 0xffff) {
      throw new StoreFormatError(
        `string too long (${raw.length} bytes)`,
        "string-too-long",
      );
    }
    this.u16(raw.length);
    this.raw(raw);
  }

  bytes(): Buffer {
    return Buffer.concat(this.chunks);
  }
}

export function storeToBytes(store: Emb1Store): Buffer {
  validateStore(store);
  const w = new ByteWriter();
  w.raw(Buffer.from(MAGIC, "ascii"));
  w.u16(FORMAT_VERSION);
  w.raw(Buffer.from([store.spaceTag]));
  w.u32(store.dim);
  w.u64(store.records.length);
  const entries = Object.entries(store.metadata);
  w.u16(entries.length);
  for (const [key, value] of entries) {
    w.str16(key);
    const raw = Buffer.from(value, "utf-8");
    w.u32(raw.length);
    w.raw(raw);
  }
  for (const rec of store.records) {
    w.str16(rec.id);
    w.i32(rec.label ?? UNLABELED);
    w.str16(rec.group ?? "");
    // Float32Array is little-endian on every platform Node supports,
    // matching the on-disk layout byte for byte.
    w.raw(Buffer.from(rec.vector.buffer, rec.vector.byteOffset,
                      rec.vector.byteLength));
  }
  return w.bytes();
}

class ByteReader {
  private pos = 0;
  constructor(private data: Buffer) {}

  take(n: number): Buffer {
    if (this.pos + n > this.data.length) {
      throw new StoreFormatError("truncated payload", "truncated");
    }
    const out = this.data.subarray(this.pos, this.pos + n);
    this.pos += n;
    return out;
  }

  u16(): number {
    return this.take(2).readUInt16LE();
  }

  u32(): number {
    return this.take(4).readUInt32LE();
  }

  i32(): number {
    return this.take(4).readInt32LE();
  }

  u64(): number {
    return Number(this.take(8).readBigUInt64LE());
  }

  str16(): string {
    return this.take(this.u16()).toString("utf-8");
  }
}

export function storeFromBytes(data: Buffer): Emb1Store {
  const rd = new ByteReader(data);
  if (rd.take(4).toString("ascii") !== MAGIC) {
    throw new StoreFormatError("not an EMB1 file (bad magic)", "bad-magic");
  }
  const version = rd.u16();
  if (version !== FORMAT_VERSION) {
    throw new StoreFormatError(
      `unsupported EMB1 version ${version}`,
      "bad-version",
    );
  }
  const tag = rd.take(1)[0];
  if (!(tag in SpaceTag)) {
    throw new StoreFormatError(`unknown space tag ${tag}`, "bad-version");
  }
  const dim = rd.u32();
  const count = rd.u64();
  const metadata: Record<string, string> = {};
  const nMeta = rd.u16();
  for (let i = 0; i < nMeta; i++) {
    const key = rd.str16();
    const vlen = rd.u32();
    metadata[key] = rd.take(vlen).toString("utf-8");
  }
  const records: EmbeddingRecord[] = [];
  for (let i = 0; i < count; i++) {
    const id = rd.str16();
    const label = rd.i32();
    const group = rd.str16();
    const raw = rd.take(4 * dim);
    // copy so the typed array owns aligned memory independent of `data`
    const vector = new Float32Array(
      raw.buffer.slice(raw.byteOffset, raw.byteOffset + raw.byteLength),
    );
    records.push({ id, vector, label, group });
  }
  const store: Emb1Store = { dim, spaceTag: tag as SpaceTag, records, metadata };
  validateStore(store);
  return store;
}
