"""The two deep architectures over frozen pre-trained vectors.

  bilstm-encdec   stacked bidirectional LSTM encoder (128, 64, 64 units)
                  feeding a dense softmax decoder
  han             hierarchical attention: the window is read as
                  sentences x words, words are attention-pooled into
                  sentence vectors, sentences into one document vector
"""

from __future__ import annotations

import keras
import numpy as np
from keras import layers

ARCH_BILSTM = "bilstm-encdec"
ARCH_HAN = "han"
ARCHITECTURES = (ARCH_BILSTM, ARCH_HAN)


@keras.saving.register_keras_serializable(package="deep_baselines")
class AttentionPool(layers.Layer):
    """Additive attention pooling: softmax(v . tanh(W h)) weighted sum."""

    def __init__(self, units: int, **kwargs):
        super().__init__(**kwargs)
        self.units = units

    def build(self, input_shape):
        width = int(input_shape[-1])
        self.kernel = self.add_weight(
            name="kernel", shape=(width, self.units), initializer="glorot_uniform"
        )
        self.bias = self.add_weight(
            name="bias", shape=(self.units,), initializer="zeros"
        )
        self.context = self.add_weight(
            name="context", shape=(self.units, 1), initializer="glorot_uniform"
        )

    def call(self, inputs, mask=None):
        scores = keras.ops.tanh(
            keras.ops.matmul(inputs, self.kernel) + self.bias
        )
        scores = keras.ops.matmul(scores, self.context)
        if mask is not None:
            mask = keras.ops.expand_dims(keras.ops.cast(mask, scores.dtype), -1)
            scores = scores + (1.0 - mask) * -1e9
        weights = keras.ops.softmax(scores, axis=1)
        return keras.ops.sum(weights * inputs, axis=1)

    def compute_mask(self, inputs, mask=None):
        return None

    def get_config(self):
        config = super().get_config()
        config["units"] = self.units
        return config


def _embedding_layer(embedding: np.ndarray, mask_zero: bool) -> layers.Embedding:
    rows, dimension = embedding.shape
    return layers.Embedding(
        rows,
        dimension,
        embeddings_initializer=keras.initializers.Constant(embedding),
        trainable=False,
        mask_zero=mask_zero,
    )


def build_bilstm(window: int, embedding: np.ndarray, n_classes: int) -> keras.Model:
    inputs = keras.Input(shape=(window,), dtype="int64")
    x = _embedding_layer(embedding, mask_zero=True)(inputs)
    x = layers.Bidirectional(layers.LSTM(128, return_sequences=True))(x)
    x = layers.Bidirectional(layers.LSTM(64, return_sequences=True))(x)
    x = layers.Bidirectional(layers.LSTM(64))(x)
    outputs = layers.Dense(n_classes, activation="softmax")(x)
    return keras.Model(inputs, outputs, name="bilstm_encdec")


def build_han(
    window: int,
    embedding: np.ndarray,
    n_classes: int,
    sentences: int = 8,
) -> keras.Model:
    """Hierarchical attention over a sentences x words view of the window.

    Padding positions carry the zero vector; attention learns to give
    them no weight, so no explicit mask is threaded through the reshape.
    """
    if window % sentences != 0:
        raise ValueError(
            f"window {window} does not divide into {sentences} sentences"
        )
    words = window // sentences
    dimension = embedding.shape[1]

    word_input = keras.Input(shape=(words, dimension))
    h = layers.Bidirectional(layers.GRU(32, return_sequences=True))(word_input)
    word_vector = AttentionPool(32)(h)
    word_encoder = keras.Model(word_input, word_vector, name="word_encoder")

    inputs = keras.Input(shape=(window,), dtype="int64")
    x = _embedding_layer(embedding, mask_zero=False)(inputs)
    x = layers.Reshape((sentences, words, dimension))(x)
    x = layers.TimeDistributed(word_encoder)(x)
    x = layers.Bidirectional(layers.GRU(32, return_sequences=True))(x)
    x = AttentionPool(32)(x)
    outputs = layers.Dense(n_classes, activation="softmax")(x)
    return keras.Model(inputs, outputs, name="han")


def build_model(
    arch: str, window: int, embedding: np.ndarray, n_classes: int, sentences: int = 8
) -> keras.Model:
    if arch == ARCH_BILSTM:
        return build_bilstm(window, embedding, n_classes)
    if arch == ARCH_HAN:
        return build_han(window, embedding, n_classes, sentences=sentences)
    raise ValueError(f"unknown architecture {arch!r}")
