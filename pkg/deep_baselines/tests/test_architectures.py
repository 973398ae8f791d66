"""Model construction, probability, masking, and serialization checks."""

import numpy as np
import pytest

import keras

from deep_baselines.models import (
    ARCH_BILSTM,
    ARCH_HAN,
    AttentionPool,
    build_bilstm,
    build_han,
    build_model,
)


def small_embedding(vocab_size=6, dimension=4, seed=0):
    rng = np.random.default_rng(seed)
    matrix = rng.normal(size=(vocab_size + 1, dimension)).astype(np.float32)
    matrix[0] = 0.0
    return matrix


def test_bilstm_output_shape_and_probabilities():
    model = build_bilstm(window=10, embedding=small_embedding(), n_classes=13)
    assert model.output_shape == (None, 13)
    batch = np.array([[1, 2, 3, 0, 0, 0, 0, 0, 0, 0], [4, 5, 6, 1, 2, 0, 0, 0, 0, 0]])
    probs = model.predict(batch, verbose=0)
    assert probs.shape == (2, 13)
    assert np.all(np.abs(probs.sum(axis=1) - 1.0) <= 1e-5)


def test_embedding_rows_are_frozen_inputs():
    matrix = small_embedding()
    for model in (
        build_bilstm(window=8, embedding=matrix, n_classes=3),
        build_han(window=8, embedding=matrix, n_classes=3, sentences=2),
    ):
        layer = next(l for l in model.layers if isinstance(l, keras.layers.Embedding))
        assert not layer.trainable
        assert np.allclose(layer.get_weights()[0], matrix)


def test_han_window_must_divide_into_sentences():
    with pytest.raises(ValueError, match="does not divide"):
        build_han(window=16, embedding=small_embedding(), n_classes=5, sentences=5)


def test_han_standard_partition_accepts_full_windows():
    # 8 sentences of 60 words consume 480 tokens with no truncation
    model = build_han(
        window=480, embedding=small_embedding(), n_classes=13, sentences=8
    )
    rng = np.random.default_rng(1)
    batch = rng.integers(0, 7, size=(2, 480))
    probs = model.predict(batch, verbose=0)
    assert probs.shape == (2, 13)
    assert np.all(np.abs(probs.sum(axis=1) - 1.0) <= 1e-5)


def test_build_model_dispatches_and_rejects_unknown():
    matrix = small_embedding()
    assert build_model(ARCH_BILSTM, 8, matrix, 4).name == "bilstm_encdec"
    assert build_model(ARCH_HAN, 8, matrix, 4, sentences=2).name == "han"
    with pytest.raises(ValueError, match="unknown architecture"):
        build_model("transformer", 8, matrix, 4)


def test_attention_pool_shapes_and_mask():
    layer = AttentionPool(4)
    rng = np.random.default_rng(2)
    base = rng.normal(size=(1, 5, 3)).astype(np.float32)
    spiked = base.copy()
    spiked[0, 2, :] = 99.0
    mask = keras.ops.convert_to_tensor([[True, True, False, True, True]])

    pooled = layer(base, mask=mask)
    assert tuple(pooled.shape) == (1, 3)
    # a masked position must not influence the pooled vector
    assert np.allclose(
        keras.ops.convert_to_numpy(pooled),
        keras.ops.convert_to_numpy(layer(spiked, mask=mask)),
        atol=1e-6,
    )


def test_han_round_trips_through_keras_saving(tmp_path):
    model = build_han(window=8, embedding=small_embedding(), n_classes=3, sentences=2)
    batch = np.array([[1, 2, 3, 4, 5, 6, 1, 2], [2, 2, 0, 0, 0, 0, 0, 0]])
    before = model.predict(batch, verbose=0)
    path = tmp_path / "han.keras"
    model.save(path)
    reloaded = keras.saving.load_model(path)
    after = reloaded.predict(batch, verbose=0)
    assert np.allclose(before, after, atol=1e-6)
