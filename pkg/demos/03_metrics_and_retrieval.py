"""Scoring utilities: UAR vs WAR on imbalanced data, per-class feature
variance, and Precision@k retrieval.
"""
import numpy as np

from embalign import (EmbeddingRecord, EmbeddingStore, SpaceTag,
                      per_class_variance, precision_at_k, score)

# WAR is plain accuracy; UAR averages per-class recalls, so a majority
# -class predictor looks much worse under UAR.
truth = {f"a{i}": 0 for i in range(90)} | {f"b{i}": 1 for i in range(10)}
preds = [(k, 0) for k in truth]  # predict the majority class always
rep = score(truth, preds, 2)
print(f"majority predictor on 90/10 split: WAR={rep.war:.4f} UAR={rep.uar:.4f}")

# Per-class spread of direction-normalized features: a tight class
# scores near 0, a maximally spread class defines 1.
rng = np.random.default_rng(0)
records = []
for i in range(40):
    v = np.array([1.0, 0.0, 0.0]) + 0.01 * rng.standard_normal(3)
    records.append(EmbeddingRecord(f"tight{i}", v.astype(np.float32), label=0))
for i in range(40):
    records.append(EmbeddingRecord(f"wide{i}",
                                   rng.standard_normal(3).astype(np.float32),
                                   label=1))
store = EmbeddingStore(3, SpaceTag.visual, records)
print("normalized per-class variance [tight, wide]:",
      [f"{v:.4f}" for v in per_class_variance(store, 2)])

# Video-to-text retrieval: each query's true document is its noisy copy.
docs = EmbeddingStore(8, SpaceTag.textual, [
    EmbeddingRecord(f"d{i}", rng.standard_normal(8).astype(np.float32))
    for i in range(50)
])
queries = EmbeddingStore(8, SpaceTag.visual, [
    EmbeddingRecord(f"q{i}",
                    (docs.records[i].vector
                     + 0.3 * rng.standard_normal(8)).astype(np.float32))
    for i in range(50)
])
gt = {f"q{i}": f"d{i}" for i in range(50)}
for k in (1, 5, 10):
    print(f"Precision@{k} = {precision_at_k(queries, docs, gt, k=k):.4f}")
