"""The learnable linear projection head: forward map, init, persistence.

Weights are float64 internally (training and gradient checks need the
headroom); the PHD1 file stores them as float64 little-endian:

    magic "PHD1" | version u16 = 1 | in_dim u32 | out_dim u32
    | metadata block (same layout as EMB1)
    | in_dim * out_dim float64, row-major (row i maps input component i)
"""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DimensionError, StoreFormatError

HEAD_MAGIC = b"PHD1"
HEAD_VERSION = 1


@dataclass
class HeadInit:
    """Initialization recipe: i.i.d. Normal(0, 1/in_dim) entries."""

    seed: int = 0
    kind: str = "gaussian_scaled"


@dataclass
class ProjectionHead:
    weights: np.ndarray
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 2:
            raise DimensionError("head weights must be a 2-d matrix")
        if not np.all(np.isfinite(self.weights)):
            raise StoreFormatError("head weights contain non-finite entries",
                                   code="non-finite")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "ProjectionHead":
        return ProjectionHead(self.weights.copy(), dict(self.metadata))


def init_head(in_dim: int, out_dim: int, init: HeadInit) -> ProjectionHead:
    """Fresh head with entries i.i.d. Normal(0, 1/in_dim)."""
    if in_dim < 1 or out_dim < 1:
        raise DimensionError(
            f"head dimensions must be positive, got {in_dim} x {out_dim}"
        )
    if init.kind != "gaussian_scaled":
        raise DataError(f"unsupported init kind {init.kind!r}")
    rng = np.random.default_rng(init.seed)
    w = rng.normal(0.0, 1.0 / np.sqrt(in_dim), size=(in_dim, out_dim))
    return ProjectionHead(w, {"init": f"gaussian_scaled/{init.seed}"})


def identity_head(dim: int) -> ProjectionHead:
    return ProjectionHead(np.eye(dim), {"init": "identity"})


def project(head: ProjectionHead, v: np.ndarray) -> np.ndarray:
    """Row-vector times weight matrix: maps in_dim -> out_dim."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (head.in_dim,):
        raise DimensionError(
            f"vector length {v.shape} does not match head in_dim {head.in_dim}"
        )
    return v @ head.weights


def project_batch(head: ProjectionHead, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != head.in_dim:
        raise DimensionError(
            f"batch shape {x.shape} does not match head in_dim {head.in_dim}"
        )
    return x @ head.weights


def save_head(head: ProjectionHead, destination) -> int:
    buf = bytearray()
    buf += HEAD_MAGIC
    buf += struct.pack("<HII", HEAD_VERSION, head.in_dim, head.out_dim)
    buf += struct.pack("<H", len(head.metadata))
    for key, value in head.metadata.items():
        kraw = key.encode("utf-8")
        vraw = value.encode("utf-8")
        buf += struct.pack("<H", len(kraw)) + kraw
        buf += struct.pack("<I", len(vraw)) + vraw
    buf += head.weights.astype("<f8").tobytes(order="C")
    if hasattr(destination, "write"):
        destination.write(bytes(buf))
    else:
        with open(destination, "wb") as fh:
            fh.write(bytes(buf))
    return len(buf)


def load_head(source, expect_in_dim=None, expect_out_dim=None) -> ProjectionHead:
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif hasattr(source, "read"):
        data = source.read()
    else:
        with open(source, "rb") as fh:
            data = fh.read()
    from .store import _Reader  # same cursor/truncation semantics

    rd = _Reader(data)
    if rd.take(4) != HEAD_MAGIC:
        raise StoreFormatError("not a PHD1 file (bad magic)", code="bad-magic")
    version, in_dim, out_dim = rd.unpack("<HII")
    if version != HEAD_VERSION:
        raise StoreFormatError(f"unsupported PHD1 version {version}",
                               code="bad-version")
    if expect_in_dim is not None and in_dim != expect_in_dim:
        raise StoreFormatError(
            f"head in_dim is {in_dim}, expected {expect_in_dim}",
            code="dim-mismatch",
        )
    if expect_out_dim is not None and out_dim != expect_out_dim:
        raise StoreFormatError(
            f"head out_dim is {out_dim}, expected {expect_out_dim}",
            code="dim-mismatch",
        )
    (n_meta,) = rd.unpack("<H")
    metadata = {}
    for _ in range(n_meta):
        key = rd.str16()
        (vlen,) = rd.unpack("<I")
        metadata[key] = rd.take(vlen).decode("utf-8")
    w = np.frombuffer(rd.take(8 * in_dim * out_dim), dtype="<f8").copy()
    return ProjectionHead(w.reshape(in_dim, out_dim), metadata)


def head_to_bytes(head: ProjectionHead) -> bytes:
    sink = io.BytesIO()
    save_head(head, sink)
    return sink.getvalue()
