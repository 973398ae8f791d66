"""Training and scoring with the shared optimization contract.

Adam at 0.001, weighted cross-entropy with inverse-frequency class
weights, early stopping when validation loss stops improving by more
than 0.001 for 3 epochs, best-validation weights restored.
"""

from __future__ import annotations

from dataclasses import dataclass

import keras
import numpy as np

from .data import ExportData, pad_batch
from .models import build_model


@dataclass
class FitResult:
    model: keras.Model
    epochs_run: int
    val_losses: list


def class_weight_map(labels: np.ndarray, n_classes: int) -> dict:
    """Inverse-frequency weights N / (n_classes * count); absent classes 0."""
    counts = np.bincount(labels, minlength=n_classes).astype(np.float64)
    weights = {}
    for i in range(n_classes):
        weights[i] = len(labels) / (n_classes * counts[i]) if counts[i] else 0.0
    return weights


def train_model(
    arch: str,
    data: ExportData,
    epochs: int = 50,
    batch_size: int = 128,
    learning_rate: float = 0.001,
    min_delta: float = 0.001,
    patience: int = 3,
    validation_fraction: float = 0.05,
    sentences: int = 8,
    seed: int = 0,
    verbose: int = 0,
) -> FitResult:
    keras.utils.set_random_seed(seed)
    n_classes = len(data.classes)
    model = build_model(
        arch, data.window, data.embedding, n_classes, sentences=sentences
    )
    model.compile(
        optimizer=keras.optimizers.Adam(learning_rate=learning_rate),
        loss=keras.losses.SparseCategoricalCrossentropy(),
        metrics=["accuracy"],
    )
    features = pad_batch(data.train.sequences, data.window)
    labels = data.train.labels
    order = np.random.default_rng(seed).permutation(len(labels))
    features, labels = features[order], labels[order]
    stopper = keras.callbacks.EarlyStopping(
        monitor="val_loss",
        min_delta=min_delta,
        patience=patience,
        restore_best_weights=True,
    )
    history = model.fit(
        features,
        labels,
        batch_size=batch_size,
        epochs=epochs,
        validation_split=validation_fraction,
        class_weight=class_weight_map(labels, n_classes),
        callbacks=[stopper],
        verbose=verbose,
        shuffle=True,
    )
    return FitResult(
        model=model,
        epochs_run=len(history.history["loss"]),
        val_losses=list(history.history.get("val_loss", [])),
    )


def predict_proba(model: keras.Model, data: ExportData, side) -> np.ndarray:
    features = pad_batch(side.sequences, data.window)
    return np.asarray(model.predict(features, batch_size=128, verbose=0))


def score(model: keras.Model, data: ExportData, side) -> tuple:
    """(micro_f1, y_true, y_pred) on one export side."""
    probs = predict_proba(model, data, side)
    y_pred = probs.argmax(axis=1)
    y_true = side.labels
    micro_f1 = float((y_pred == y_true).mean()) if len(y_true) else 0.0
    return micro_f1, y_true, y_pred
