import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { createHash } from "node:crypto";

import { describe, expect, it } from "vitest";

import {
  Emb1Store,
  SpaceTag,
  StoreFormatError,
  storeFromBytes,
  storeToBytes,
} from "../src/emb1.js";

function sampleStore(): Emb1Store {
  // vector components on a 1/16 grid: exactly representable in float32
  // in both runtimes, so cross-language byte comparisons are exact
  const vec = (vals: number[]) => Float32Array.from(vals);
  return {
    dim: 3,
    spaceTag: SpaceTag.visual,
    records: [
      { id: "img-0", vector: vec([0.5, -1.25, 3.0]), label: 0, group: "" },
      { id: "img-1", vector: vec([0.0625, 7.5, -2.0]), label: 1, group: "clip-a" },
      { id: "img-2", vector: vec([-0.5, 0.0, 1.1875]), label: -1, group: "clip-a" },
    ],
    metadata: { backbone: "stub-B32", note: "unit-test store ✓" },
  };
}

describe("EMB1 serialization", () => {
  it("round-trips exactly, including float bit patterns", () => {
    const store = sampleStore();
    const back = storeFromBytes(storeToBytes(store));
    expect(back.dim).toBe(store.dim);
    expect(back.spaceTag).toBe(store.spaceTag);
    expect(back.metadata).toEqual(store.metadata);
    expect(back.records.length).toBe(store.records.length);
    for (let i = 0; i < store.records.length; i++) {
      expect(back.records[i].id).toBe(store.records[i].id);
      expect(back.records[i].label).toBe(store.records[i].label ?? -1);
      expect(back.records[i].group).toBe(store.records[i].group ?? "");
      expect(Buffer.from(back.records[i].vector.buffer)).toEqual(
        Buffer.from(store.records[i].vector.buffer),
      );
    }
  });

  it("serializes bit-identically on repeated calls", () => {
    const a = storeToBytes(sampleStore());
    const b = storeToBytes(sampleStore());
    expect(a.equals(b)).toBe(true);
  });

  it("rejects duplicate ids, non-finite values, and dim mismatches", () => {
    const dup = sampleStore();
    dup.records[1].id = "img-0";
    expect(() => storeToBytes(dup)).toThrow(StoreFormatError);
    expect(() => storeToBytes(dup)).toThrow(/duplicate/);

    const nan = sampleStore();
    nan.records[0].vector[2] = NaN;
    expect(() => storeToBytes(nan)).toThrow(/non-finite/);

    const short = sampleStore();
    short.records[0].vector = Float32Array.from([1, 2]);
    expect(() => storeToBytes(short)).toThrow(/dim/);
  });

  it("raises distinct codes for bad magic, bad version, truncation", () => {
    const bytes = storeToBytes(sampleStore());

    const badMagic = Buffer.from(bytes);
    badMagic.write("NOPE", 0, "ascii");
    expect(() => storeFromBytes(badMagic)).toThrowError(
      expect.objectContaining({ code: "bad-magic" }),
    );

    const badVersion = Buffer.from(bytes);
    badVersion.writeUInt16LE(99, 4);
    expect(() => storeFromBytes(badVersion)).toThrowError(
      expect.objectContaining({ code: "bad-version" }),
    );

    expect(() =>
      storeFromBytes(bytes.subarray(0, bytes.length - 5)),
    ).toThrowError(expect.objectContaining({ code: "truncated" }));
  });
});

describe("interoperability with the Python toolkit", () => {
  const work = mkdtempSync(join(tmpdir(), "emb1-interop-"));

  it("exported files pass the toolkit's read_store validation", () => {
    const path = join(work, "sample.emb1");
    writeFileSync(path, storeToBytes(sampleStore()));
    const out = execFileSync("python3", [
      "-c",
      [
        "import sys, json",
        "from embalign import read_store",
        "s = read_store(sys.argv[1])",
        "print(json.dumps({'dim': s.dim, 'tag': s.space_tag.name,",
        "  'n': len(s), 'ids': s.ids(), 'metadata': s.metadata,",
        "  'labels': [r.label for r in s.records],",
        "  'groups': [r.group for r in s.records]}))",
      ].join("\n"),
      path,
    ]).toString();
    const parsed = JSON.parse(out);
    expect(parsed).toEqual({
      dim: 3,
      tag: "visual",
      n: 3,
      ids: ["img-0", "img-1", "img-2"],
      metadata: { backbone: "stub-B32", note: "unit-test store ✓" },
      labels: [0, 1, -1],
      groups: ["", "clip-a", "clip-a"],
    });
  });

  it("produces byte-identical files to the toolkit's own writer", () => {
    const ours = createHash("sha256")
      .update(storeToBytes(sampleStore()))
      .digest("hex");
    const theirs = execFileSync("python3", [
      "-c",
      [
        "import hashlib",
        "import numpy as np",
        "from embalign import EmbeddingRecord, EmbeddingStore, SpaceTag",
        "from embalign.store import store_to_bytes",
        "s = EmbeddingStore(3, SpaceTag.visual, [",
        "  EmbeddingRecord('img-0', np.array([0.5, -1.25, 3.0], np.float32), 0, ''),",
        "  EmbeddingRecord('img-1', np.array([0.0625, 7.5, -2.0], np.float32), 1, 'clip-a'),",
        "  EmbeddingRecord('img-2', np.array([-0.5, 0.0, 1.1875], np.float32), -1, 'clip-a'),",
        "], {'backbone': 'stub-B32', 'note': 'unit-test store \\u2713'})",
        "print(hashlib.sha256(store_to_bytes(s)).hexdigest())",
      ].join("\n"),
    ])
      .toString()
      .trim();
    expect(ours).toBe(theirs);
  });

  it("reads files the toolkit wrote", () => {
    const path = join(work, "python-written.emb1");
    execFileSync("python3", [
      "-c",
      [
        "import sys",
        "import numpy as np",
        "from embalign import EmbeddingRecord, EmbeddingStore, SpaceTag, write_store",
        "s = EmbeddingStore(4, SpaceTag.llm_target, [",
        "  EmbeddingRecord(f'r{i}', np.arange(4, dtype=np.float32) + i)",
        "  for i in range(5)], {'instruction': 'describe the face'})",
        "write_store(s, sys.argv[1])",
      ].join("\n"),
      path,
    ]);
    const store = storeFromBytes(readFileSync(path));
    expect(store.dim).toBe(4);
    expect(store.spaceTag).toBe(SpaceTag.llm_target);
    expect(store.records.map((r) => r.id)).toEqual(
      ["r0", "r1", "r2", "r3", "r4"],
    );
    expect(Array.from(store.records[2].vector)).toEqual([2, 3, 4, 5]);
  });
});
