import io

import numpy as np
import pytest

from embalign import (DimensionError, HeadInit, ProjectionHead,
                      StoreFormatError, identity_head, init_head, load_head,
                      project, save_head)
from embalign.projection import head_to_bytes


def test_init_deterministic():
    a = init_head(2, 2, HeadInit(seed=11))
    b = init_head(2, 2, HeadInit(seed=11))
    assert np.array_equal(a.weights, b.weights)
    c = init_head(2, 2, HeadInit(seed=12))
    assert not np.array_equal(a.weights, c.weights)


def test_init_variance_scale():
    head = init_head(512, 4096, HeadInit(seed=0))
    var = head.weights.var()
    assert abs(var - 1 / 512) < 0.1 / 512


def test_init_rejects_bad_dims():
    with pytest.raises(DimensionError):
        init_head(0, 4, HeadInit())
    with pytest.raises(DimensionError):
        init_head(4, -1, HeadInit())


def test_project_identity():
    head = identity_head(5)
    v = np.array([1.0, -2.0, 3.0, 0.5, 0.0])
    assert np.array_equal(project(head, v), v)


def test_project_zeros():
    head = ProjectionHead(np.zeros((3, 4)))
    assert np.array_equal(project(head, [1.0, 2.0, 3.0]), np.zeros(4))


def test_project_hand_arithmetic():
    head = ProjectionHead(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert np.array_equal(project(head, [1.0, 1.0]), [4.0, 6.0])


def test_project_length_mismatch():
    with pytest.raises(DimensionError):
        project(identity_head(3), [1.0, 2.0])


def test_linearity(rng):
    head = ProjectionHead(rng.standard_normal((64, 32)))
    worst = 0.0
    for _ in range(100):
        u = rng.standard_normal(64)
        w = rng.standard_normal(64)
        a, b = rng.standard_normal(2)
        lhs = project(head, a * u + b * w)
        rhs = a * project(head, u) + b * project(head, w)
        worst = max(worst, np.max(np.abs(lhs - rhs)))
    assert worst <= 1e-9


def test_save_load_bit_exact(tmp_path, rng):
    head = ProjectionHead(rng.standard_normal((7, 3)),
                          {"train_config": "abc123", "note": "x"})
    path = tmp_path / "head.phd1"
    save_head(head, path)
    loaded = load_head(path)
    assert loaded.weights.tobytes() == head.weights.tobytes()
    assert loaded.metadata == head.metadata


def test_load_dim_mismatch_names_both():
    head = ProjectionHead(np.zeros((4, 2)))
    blob = head_to_bytes(head)
    with pytest.raises(StoreFormatError) as err:
        load_head(blob, expect_in_dim=8)
    assert "4" in str(err.value) and "8" in str(err.value)
    assert err.value.code == "dim-mismatch"


def test_load_truncated():
    blob = head_to_bytes(ProjectionHead(np.zeros((4, 2))))
    with pytest.raises(StoreFormatError) as err:
        load_head(blob[:-5])
    assert err.value.code == "truncated"


def test_load_bad_magic():
    with pytest.raises(StoreFormatError) as err:
        load_head(b"XXXX" + b"\x00" * 20)
    assert err.value.code == "bad-magic"


def test_fingerprint_survives_roundtrip():
    head = ProjectionHead(np.ones((2, 2)), {"train_config": "deadbeef"})
    sink = io.BytesIO()
    save_head(head, sink)
    assert load_head(sink.getvalue()).metadata["train_config"] == "deadbeef"
