"""Scoring: confusion matrix, unweighted/weighted average recall,
per-class normalized feature variance, and Precision@k retrieval.

Counting stays in integers until the final divisions.  Classes without
true samples are excluded from the unweighted mean (and reported), so a
subset evaluation is not silently deflated.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DimensionError
from .projection import ProjectionHead, project_batch
from .store import EmbeddingStore


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # rows = true class, columns = predicted
    class_names: list[str] = field(default_factory=list)

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]


@dataclass
class EvalReport:
    confusion: ConfusionMatrix
    uar: float
    war: float
    per_class_recall: list[float]
    n: int
    empty_classes: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "class_names": self.confusion.class_names,
            "confusion": self.confusion.counts.tolist(),
            "uar": round(self.uar, 4),
            "war": round(self.war, 4),
            "per_class_recall": [
                None if math.isnan(r) else round(r, 4)
                for r in self.per_class_recall
            ],
            "n": self.n,
            "empty_classes": self.empty_classes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def score(truth, predictions, n_classes: int,
          class_names: list[str] | None = None) -> EvalReport:
    """Confusion matrix plus UAR/WAR.

    ``truth`` maps id -> label (a dict or a labeled EmbeddingStore);
    ``predictions`` is an iterable of (id, predicted class index).
    """
    if isinstance(truth, EmbeddingStore):
        truth = truth.labels()
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    for sample_id, pred in predictions:
        if sample_id not in truth:
            raise DataError(f"prediction id {sample_id!r} not found in truth")
        label = truth[sample_id]
        if not (0 <= label < n_classes):
            raise DataError(
                f"label {label} of {sample_id!r} outside [0, {n_classes})"
            )
        if not (0 <= pred < n_classes):
            raise DataError(
                f"predicted class {pred} of {sample_id!r} outside "
                f"[0, {n_classes})"
            )
        counts[label, pred] += 1

    total = int(counts.sum())
    correct = int(np.trace(counts))
    war = correct / total if total else 0.0
    row_sums = counts.sum(axis=1)
    recalls = []
    empty = []
    for k in range(n_classes):
        if row_sums[k] == 0:
            recalls.append(math.nan)
            empty.append(k)
        else:
            recalls.append(int(counts[k, k]) / int(row_sums[k]))
    populated = [r for r in recalls if not math.isnan(r)]
    uar = float(np.mean(populated)) if populated else 0.0
    names = class_names or [f"class-{k}" for k in range(n_classes)]
    return EvalReport(
        confusion=ConfusionMatrix(counts, names),
        uar=uar, war=war, per_class_recall=recalls, n=total,
        empty_classes=empty,
    )


def per_class_variance(features: EmbeddingStore, n_classes: int,
                       head: ProjectionHead | None = None) -> list[float]:
    """Spread of L2-normalized (optionally projected) features per
    class: trace of the sample covariance divided by the feature
    dimension, max-normalized across classes for plotting.

    Classes with fewer than 2 samples get ``nan`` and a warning.
    """
    mat = features.matrix()
    if head is not None:
        mat = project_batch(head, mat)
    norms = np.linalg.norm(mat, axis=1)
    if np.any(norms == 0.0):
        raise DataError("zero-norm feature vector")
    unit = mat / norms[:, None]
    dim = unit.shape[1]
    labels = np.array([r.label for r in features.records])
    raw = []
    for k in range(n_classes):
        rows = unit[labels == k]
        if rows.shape[0] < 2:
            warnings.warn(f"class {k} has {rows.shape[0]} samples; "
                          "variance undefined, excluded")
            raw.append(math.nan)
            continue
        cov_trace = float(np.sum(np.var(rows, axis=0, ddof=1)))
        raw.append(cov_trace / dim)
    valid = [v for v in raw if not math.isnan(v)]
    peak = max(valid) if valid else 0.0
    if peak == 0.0:
        return raw
    return [v / peak if not math.isnan(v) else v for v in raw]


def precision_at_k(query_embs: EmbeddingStore, doc_embs: EmbeddingStore,
                   ground_truth: dict[str, str], k: int,
                   head: ProjectionHead | None = None) -> float:
    """Fraction of queries whose true document lands in the top-k by
    cosine similarity.  Ties break toward earlier documents."""
    if k < 1:
        raise DataError("k must be at least 1")
    n_docs = len(doc_embs)
    if n_docs == 0:
        raise DataError("no documents to retrieve from")
    if k > n_docs:
        warnings.warn(f"k={k} exceeds document count {n_docs}; clamped")
        k = n_docs
    doc_ids = doc_embs.ids()
    doc_index = {d: i for i, d in enumerate(doc_ids)}
    q_mat = query_embs.matrix()
    d_mat = doc_embs.matrix()
    if head is not None:
        if q_mat.shape[1] != head.in_dim or d_mat.shape[1] != head.in_dim:
            raise DimensionError("embedding dims do not match the head")
        q_mat = project_batch(head, q_mat)
        d_mat = project_batch(head, d_mat)
    q_norms = np.linalg.norm(q_mat, axis=1)
    d_norms = np.linalg.norm(d_mat, axis=1)
    if np.any(q_norms == 0.0) or np.any(d_norms == 0.0):
        raise DataError("zero-norm embedding in retrieval")
    sims = (q_mat / q_norms[:, None]) @ (d_mat / d_norms[:, None]).T

    hits = 0
    for qi, rec in enumerate(query_embs.records):
        if rec.id not in ground_truth:
            raise DataError(f"query {rec.id!r} has no ground-truth document")
        true_doc = ground_truth[rec.id]
        if true_doc not in doc_index:
            raise DataError(f"ground-truth document {true_doc!r} not found")
        # stable sort on negated sims keeps insertion order among ties
        ranked = np.argsort(-sims[qi], kind="stable")[:k]
        if doc_index[true_doc] in ranked:
            hits += 1
    return hits / len(query_embs)
