"""Typed embedding collections and the EMB1 binary file format.

An :class:`EmbeddingStore` is an ordered, immutable-by-convention list of
id-tagged float32 vectors of a single dimension, plus a string metadata
map.  The EMB1 layout (all integers little-endian):

    magic "EMB1" | version u16 = 1 | space_tag u8 | dim u32 | count u64
    | metadata: entry count u16, then per entry
        (key len u16, key bytes, value len u32, value bytes)
    | records: per record
        (id len u16, id bytes, label i32, group len u16, group bytes,
         dim x float32)

Writing is bit-reproducible for equal inputs and ``read_store`` is its
exact inverse, including float bit patterns.
"""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DataError, StoreFormatError

MAGIC = b"EMB1"
FORMAT_VERSION = 1

UNLABELED = -1


class SpaceTag(Enum):
    visual = 0
    textual = 1
    llm_target = 2


@dataclass
class EmbeddingRecord:
    """One dense vector with an id, an optional class label and an
    optional group id (video id for frame records)."""

    id: str
    vector: np.ndarray
    label: int = UNLABELED
    group: str = ""

    def __post_init__(self):
        self.vector = np.asarray(self.vector, dtype=np.float32)


@dataclass
class EmbeddingStore:
    dim: int
    space_tag: SpaceTag
    records: list[EmbeddingRecord] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    def by_id(self) -> dict[str, EmbeddingRecord]:
        return {r.id: r for r in self.records}

    def labels(self) -> dict[str, int]:
        return {r.id: r.label for r in self.records}

    def matrix(self, dtype=np.float64) -> np.ndarray:
        """All vectors stacked in record order, shape (n, dim)."""
        if not self.records:
            return np.zeros((0, self.dim), dtype=dtype)
        return np.stack([r.vector for r in self.records]).astype(dtype)

    def validate(self) -> None:
        if self.dim <= 0:
            raise StoreFormatError("dim must be positive", code="dim-mismatch")
        seen = set()
        for rec in self.records:
            if rec.vector.shape != (self.dim,):
                raise StoreFormatError(
                    f"record {rec.id!r} has length {rec.vector.shape}, "
                    f"store dim is {self.dim}",
                    code="dim-mismatch",
                )
            if not np.all(np.isfinite(rec.vector)):
                raise StoreFormatError(
                    f"record {rec.id!r} contains a non-finite component",
                    code="non-finite",
                )
            if rec.id in seen:
                raise StoreFormatError(
                    f"duplicate record id {rec.id!r}", code="duplicate-id"
                )
            seen.add(rec.id)


@dataclass
class PairedDataset:
    """Bijective pairing of a visual store with a target store."""

    visual: EmbeddingStore
    target: EmbeddingStore
    pairing: list[tuple[str, str]]

    def __len__(self):
        return len(self.pairing)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(inputs, targets) as float64 matrices in pairing order."""
        vis = self.visual.by_id()
        tgt = self.target.by_id()
        x = np.stack([vis[a].vector for a, _ in self.pairing]).astype(np.float64)
        t = np.stack([tgt[b].vector for _, b in self.pairing]).astype(np.float64)
        return x, t


def _pack_str16(buf: bytearray, s: str) -> None:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise StoreFormatError(f"string too long ({len(raw)} bytes)")
    buf += struct.pack("<H", len(raw))
    buf += raw


def write_store(store: EmbeddingStore, destination) -> int:
    """Serialize ``store`` to EMB1.  ``destination`` is a path or a
    binary file object.  Returns the number of bytes written.  Nothing
    is written if the store is invalid."""
    store.validate()
    buf = bytearray()
    buf += MAGIC
    buf += struct.pack("<HBIQ", FORMAT_VERSION, store.space_tag.value,
                       store.dim, len(store.records))
    buf += struct.pack("<H", len(store.metadata))
    for key, value in store.metadata.items():
        _pack_str16(buf, key)
        raw = value.encode("utf-8")
        buf += struct.pack("<I", len(raw))
        buf += raw
    for rec in store.records:
        _pack_str16(buf, rec.id)
        buf += struct.pack("<i", int(rec.label))
        _pack_str16(buf, rec.group)
        buf += rec.vector.astype("<f4").tobytes()
    if hasattr(destination, "write"):
        destination.write(bytes(buf))
    else:
        with open(destination, "wb") as fh:
            fh.write(bytes(buf))
    return len(buf)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise StoreFormatError("truncated payload", code="truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def str16(self) -> str:
        (n,) = self.unpack("<H")
        return self.take(n).decode("utf-8")


def read_store(source) -> EmbeddingStore:
    """Parse an EMB1 file (path, binary file object, or bytes) into a
    validated :class:`EmbeddingStore`."""
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif hasattr(source, "read"):
        data = source.read()
    else:
        with open(source, "rb") as fh:
            data = fh.read()
    rd = _Reader(data)
    if rd.take(4) != MAGIC:
        raise StoreFormatError("not an EMB1 file (bad magic)", code="bad-magic")
    version, tag, dim, count = rd.unpack("<HBIQ")
    if version != FORMAT_VERSION:
        raise StoreFormatError(
            f"unsupported EMB1 version {version}", code="bad-version"
        )
    try:
        space_tag = SpaceTag(tag)
    except ValueError:
        raise StoreFormatError(f"unknown space tag {tag}", code="bad-version")
    (n_meta,) = rd.unpack("<H")
    metadata = {}
    for _ in range(n_meta):
        key = rd.str16()
        (vlen,) = rd.unpack("<I")
        metadata[key] = rd.take(vlen).decode("utf-8")
    records = []
    for _ in range(count):
        rec_id = rd.str16()
        (label,) = rd.unpack("<i")
        group = rd.str16()
        vec = np.frombuffer(rd.take(4 * dim), dtype="<f4").copy()
        records.append(EmbeddingRecord(rec_id, vec, label, group))
    store = EmbeddingStore(dim=dim, space_tag=space_tag,
                           records=records, metadata=metadata)
    store.validate()
    return store


def store_to_bytes(store: EmbeddingStore) -> bytes:
    sink = io.BytesIO()
    write_store(store, sink)
    return sink.getvalue()


def make_pairs(visual: EmbeddingStore, target: EmbeddingStore,
               rule: str = "by_id") -> PairedDataset:
    """Pair a visual store with a target store.

    ``by_id`` requires identical id sets; ``by_order`` requires equal
    record counts and pairs positionally.  The pairing follows visual
    store order either way.
    """
    if visual.space_tag == target.space_tag:
        raise DataError(
            "visual and target stores carry the same space tag "
            f"({visual.space_tag.name}); a training pair must cross spaces",
            code="same-space",
        )
    if rule == "by_id":
        tgt_ids = set(target.ids())
        vis_ids = set(visual.ids())
        for rec in visual.records:
            if rec.id not in tgt_ids:
                raise DataError(
                    f"id {rec.id!r} has no target record", code="unmatched-id"
                )
        missing = tgt_ids - vis_ids
        if missing:
            raise DataError(
                f"id {sorted(missing)[0]!r} has no visual record",
                code="unmatched-id",
            )
        pairing = [(r.id, r.id) for r in visual.records]
    elif rule == "by_order":
        if len(visual) != len(target):
            raise DataError(
                f"record counts differ: {len(visual)} vs {len(target)}",
                code="count-mismatch",
            )
        pairing = [(v.id, t.id) for v, t in zip(visual.records, target.records)]
    else:
        raise DataError(f"unknown pairing rule {rule!r}", code="bad-rule")
    return PairedDataset(visual=visual, target=target, pairing=pairing)
