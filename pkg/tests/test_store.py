import hashlib
import io

import numpy as np
import pytest

from embalign import (DataError, EmbeddingRecord, EmbeddingStore, SpaceTag,
                      StoreFormatError, make_pairs, read_store, write_store)
from embalign.store import store_to_bytes

from conftest import make_store


def roundtrip(store):
    return read_store(store_to_bytes(store))


def assert_stores_equal(a, b):
    assert a.dim == b.dim
    assert a.space_tag == b.space_tag
    assert a.metadata == b.metadata
    assert len(a) == len(b)
    for ra, rb in zip(a.records, b.records):
        assert ra.id == rb.id
        assert ra.label == rb.label
        assert ra.group == rb.group
        assert ra.vector.tobytes() == rb.vector.tobytes()


def test_empty_store_roundtrip():
    store = EmbeddingStore(dim=4, space_tag=SpaceTag.visual)
    data = store_to_bytes(store)
    # magic(4) + header(15) + metadata count(2)
    assert len(data) == 21
    assert_stores_equal(store, read_store(data))


def test_small_roundtrip_bit_exact():
    store = make_store([[1, 0], [0, 1], [0.5, 0.5]],
                       metadata={"encoder": "test", "note": "three records"})
    assert_stores_equal(store, roundtrip(store))


def test_large_roundtrip_and_stable_digest(rng):
    vecs = rng.standard_normal((10_000, 512)).astype(np.float32)
    store = make_store(list(vecs), labels=list(rng.integers(0, 7, 10_000)))
    blob1 = store_to_bytes(store)
    blob2 = store_to_bytes(roundtrip(store))
    assert blob1 == blob2
    assert hashlib.sha256(blob1).hexdigest() == hashlib.sha256(blob2).hexdigest()


def test_write_returns_byte_count():
    store = make_store([[1, 2, 3]])
    sink = io.BytesIO()
    n = write_store(store, sink)
    assert n == len(sink.getvalue())


def test_bad_magic_rejected():
    with pytest.raises(StoreFormatError) as err:
        read_store(b"NOPE" + b"\x00" * 40)
    assert err.value.code == "bad-magic"


def test_version_mismatch_rejected():
    data = bytearray(store_to_bytes(make_store([[1.0]])))
    data[4] = 99  # version field
    with pytest.raises(StoreFormatError) as err:
        read_store(bytes(data))
    assert err.value.code == "bad-version"


def test_truncated_payload_rejected():
    data = store_to_bytes(make_store([[1, 2], [3, 4]]))
    with pytest.raises(StoreFormatError) as err:
        read_store(data[:-3])
    assert err.value.code == "truncated"


def test_nan_component_rejected():
    store = make_store([[1.0, 2.0]])
    blob = bytearray(store_to_bytes(store))
    blob[-8:-4] = np.array([np.nan], dtype="<f4").tobytes()
    with pytest.raises(StoreFormatError) as err:
        read_store(bytes(blob))
    assert err.value.code == "non-finite"


def test_duplicate_id_rejected():
    store = make_store([[1.0], [2.0]], ids=["a", "a"])
    with pytest.raises(StoreFormatError) as err:
        write_store(store, io.BytesIO())
    assert err.value.code == "duplicate-id"


def test_invalid_store_writes_nothing():
    store = make_store([[1.0], [2.0]], ids=["a", "a"])
    sink = io.BytesIO()
    with pytest.raises(StoreFormatError):
        write_store(store, sink)
    assert sink.getvalue() == b""


def test_make_pairs_by_id():
    vis = make_store([[1.0], [2.0], [3.0]], ids=["a", "b", "c"])
    tgt = make_store([[5.0], [6.0], [4.0]], ids=["c", "a", "b"],
                     tag=SpaceTag.llm_target)
    ds = make_pairs(vis, tgt, "by_id")
    assert ds.pairing == [("a", "a"), ("b", "b"), ("c", "c")]
    assert set(a for a, _ in ds.pairing) == set(b for _, b in ds.pairing)


def test_make_pairs_by_order():
    vis = make_store([[float(i)] for i in range(5)])
    tgt = make_store([[float(i)] for i in range(5)],
                     ids=[f"t{i}" for i in range(5)], tag=SpaceTag.llm_target)
    ds = make_pairs(vis, tgt, "by_order")
    assert ds.pairing == [(f"r{i}", f"t{i}") for i in range(5)]


def test_make_pairs_missing_id_names_it():
    vis = make_store([[1.0], [2.0], [3.0]], ids=["a", "b", "c"])
    tgt = make_store([[1.0], [2.0]], ids=["a", "b"], tag=SpaceTag.llm_target)
    with pytest.raises(DataError) as err:
        make_pairs(vis, tgt, "by_id")
    assert "'c'" in str(err.value)


def test_make_pairs_count_mismatch():
    vis = make_store([[1.0], [2.0]])
    tgt = make_store([[1.0]], tag=SpaceTag.llm_target)
    with pytest.raises(DataError):
        make_pairs(vis, tgt, "by_order")


def test_make_pairs_rejects_same_space():
    vis = make_store([[1.0]])
    tgt = make_store([[1.0]])
    with pytest.raises(DataError):
        make_pairs(vis, tgt, "by_id")
