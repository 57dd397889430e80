import numpy as np
import pytest

from embalign import EmbeddingRecord, EmbeddingStore, SpaceTag


def make_store(vectors, tag=SpaceTag.visual, ids=None, labels=None,
               groups=None, metadata=None):
    vectors = [np.asarray(v, dtype=np.float32) for v in vectors]
    dim = len(vectors[0]) if vectors else 4
    records = []
    for i, v in enumerate(vectors):
        records.append(EmbeddingRecord(
            id=ids[i] if ids else f"r{i}",
            vector=v,
            label=labels[i] if labels else -1,
            group=groups[i] if groups else "",
        ))
    return EmbeddingStore(dim=dim, space_tag=tag, records=records,
                          metadata=metadata or {})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
