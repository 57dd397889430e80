"""Synthetic paired datasets for desk-scale testing.

Visual samples are Gaussian clusters around K orthonormal anchor
directions in the input space.  Targets are a hidden rotation of K
orthonormal anchors in the output space plus noise, so a linear map
from visual space to target space exists exactly at zero noise.  The
prompt-set embeddings are the (rotated) target-space class anchors,
usable directly as class prototypes.

Geometry (anchors and rotation) is drawn from ``rotation_seed`` while
samples are drawn from ``seed``, so held-out splits reuse the geometry
with a fresh sample seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import PromptSet
from .errors import DataError
from .store import EmbeddingRecord, EmbeddingStore, PairedDataset, SpaceTag


@dataclass
class SynthSpec:
    classes: int
    per_class: int
    dim_in: int
    dim_out: int
    separation: float = 4.0
    noise: float = 0.05
    seed: int = 0
    rotation_seed: int = 0

    def validate(self):
        if self.classes > min(self.dim_in, self.dim_out):
            raise DataError(
                f"{self.classes} classes do not fit in "
                f"min(dim_in, dim_out) = {min(self.dim_in, self.dim_out)}"
            )
        if self.classes < 2 or self.per_class <= 0:
            raise DataError("need at least 2 classes and a positive per-class count")
        if self.dim_in <= 0 or self.dim_out <= 0:
            raise DataError("dimensions must be positive")
        if self.noise < 0 or self.separation <= 0:
            raise DataError("separation must be positive and noise non-negative")


def _orthonormal_rows(rng: np.random.Generator, k: int, dim: int) -> np.ndarray:
    """k orthonormal directions in R^dim, rows of the result."""
    q, r = np.linalg.qr(rng.standard_normal((dim, k)))
    q *= np.sign(np.diag(r))  # fix QR sign ambiguity for determinism
    return q.T


def synth_geometry(spec: SynthSpec):
    """(visual anchors K x dim_in, target anchors K x dim_out)."""
    rng = np.random.default_rng(spec.rotation_seed)
    visual_anchors = _orthonormal_rows(rng, spec.classes, spec.dim_in)
    basis = np.eye(spec.dim_out)[: spec.classes]
    rotation = _orthonormal_rows(rng, spec.dim_out, spec.dim_out).T
    target_anchors = basis @ rotation.T
    return visual_anchors, target_anchors


def synth_generate(spec: SynthSpec) -> tuple[PairedDataset, PromptSet]:
    """Deterministic synthetic dataset plus matching prompt set."""
    spec.validate()
    visual_anchors, target_anchors = synth_geometry(spec)
    rng = np.random.default_rng(spec.seed)

    vis_records, tgt_records = [], []
    for k in range(spec.classes):
        for i in range(spec.per_class):
            rid = f"c{k:02d}-{i:05d}"
            v = spec.separation * visual_anchors[k]
            t = target_anchors[k].copy()
            if spec.noise > 0:
                v = v + spec.noise * rng.standard_normal(spec.dim_in)
                t = t + spec.noise * rng.standard_normal(spec.dim_out)
            vis_records.append(EmbeddingRecord(rid, v.astype(np.float32), label=k))
            tgt_records.append(EmbeddingRecord(rid, t.astype(np.float32), label=k))

    meta = {
        "generator": "synth",
        "classes": str(spec.classes),
        "separation": repr(spec.separation),
        "noise": repr(spec.noise),
        "seed": str(spec.seed),
        "rotation_seed": str(spec.rotation_seed),
    }
    visual = EmbeddingStore(spec.dim_in, SpaceTag.visual, vis_records, dict(meta))
    target = EmbeddingStore(spec.dim_out, SpaceTag.llm_target, tgt_records, dict(meta))
    pairing = [(r.id, r.id) for r in vis_records]
    dataset = PairedDataset(visual, target, pairing)

    class_names = [f"class-{k}" for k in range(spec.classes)]
    templates = ["{class name}"]
    text_records = [
        EmbeddingRecord(f"class:{k}/tpl:0", target_anchors[k].astype(np.float32),
                        label=k)
        for k in range(spec.classes)
    ]
    text_meta = dict(meta)
    del text_meta["seed"]  # prompts depend only on the geometry seed
    text_meta["class_names"] = ",".join(class_names)
    text_meta["templates"] = "|".join(templates)
    text_store = EmbeddingStore(spec.dim_out, SpaceTag.textual, text_records,
                                text_meta)
    prompts = PromptSet(class_names=class_names, templates=templates,
                        text_embeddings=text_store)
    return dataset, prompts
