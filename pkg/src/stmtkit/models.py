"""Shallow baseline classifiers over the fixed input window.

Three trainable kinds share one loss, one optimizer, and one training
loop. Features are built lazily per batch: the embedded kinds would
otherwise materialize the whole corpus as dense float rows.

  index mode      window indices scaled into [0, 1]
  embedded mode   looked-up vectors flattened to window * dimension
  mlp             embedded features through one rectifier hidden layer
"""

from __future__ import annotations

import copy
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .embeddings import Vocabulary, embed

KIND_ZERO_RULE = "zero-rule"
KIND_LOGREG_INDEX = "logreg-index"
KIND_LOGREG_EMBEDDED = "logreg-embedded"
KIND_MLP = "mlp"
TRAINABLE_KINDS = (KIND_LOGREG_INDEX, KIND_LOGREG_EMBEDDED, KIND_MLP)

PROB_TOLERANCE = 1e-6
LOG_FLOOR = 1e-12


class TrainingDivergedError(RuntimeError):
    """Non-finite gradients; learning rate or data need attention."""


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def weighted_cross_entropy(
    probs: np.ndarray, labels: np.ndarray, class_weights: np.ndarray
) -> float:
    """Mean of -w[y] * log(max(p[y], 1e-12)) over the batch.

    Rows must be valid distributions: nonnegative, summing to 1 within
    1e-6.
    """
    probs = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    labels = np.atleast_1d(np.asarray(labels))
    if probs.shape[0] != labels.shape[0]:
        raise ValueError("one label per probability row required")
    if (probs < 0).any():
        raise ValueError("negative probability")
    sums = probs.sum(axis=1)
    if np.abs(sums - 1.0).max() > PROB_TOLERANCE:
        raise ValueError("probability rows must sum to 1 within 1e-6")
    picked = probs[np.arange(len(labels)), labels]
    losses = -np.asarray(class_weights)[labels] * np.log(np.maximum(picked, LOG_FLOOR))
    return float(losses.mean())


def class_weights(labels: np.ndarray, n_classes: int, scheme: str = "balanced") -> np.ndarray:
    """Per-class loss weights: N / (n_classes * count), or all ones."""
    if scheme == "uniform":
        return np.ones(n_classes, dtype=np.float64)
    if scheme != "balanced":
        raise ValueError(f"unknown class weight scheme {scheme!r}")
    counts = np.bincount(np.asarray(labels), minlength=n_classes).astype(np.float64)
    weights = np.zeros(n_classes, dtype=np.float64)
    present = counts > 0
    weights[present] = len(labels) / (n_classes * counts[present])
    return weights


class Adam:
    """First-order optimizer over a dict of parameter arrays."""

    def __init__(
        self,
        learning_rate: float = 0.001,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step_count = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for name, grad in grads.items():
            if not np.isfinite(grad).all():
                raise TrainingDivergedError(
                    f"non-finite gradient for {name!r} at step {self.step_count + 1}"
                )
        self.step_count += 1
        t = self.step_count
        for name, grad in grads.items():
            m = self._m.setdefault(name, np.zeros_like(params[name]))
            v = self._v.setdefault(name, np.zeros_like(params[name]))
            m *= self.beta1
            m += (1 - self.beta1) * grad
            v *= self.beta2
            v += (1 - self.beta2) * grad * grad
            m_hat = m / (1 - self.beta1**t)
            v_hat = v / (1 - self.beta2**t)
            params[name] -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)


class EarlyStopping:
    """Stop when validation loss fails to improve by min_delta for
    patience consecutive epochs."""

    def __init__(self, min_delta: float = 0.001, patience: int = 3):
        self.min_delta = min_delta
        self.patience = patience
        self.best = float("inf")
        self.wait = 0

    def update(self, val_loss: float) -> bool:
        """Record an epoch's validation loss; True means stop now.

        An epoch improves only when its loss drops below best minus
        min_delta; shrinking by exactly min_delta does not count.
        """
        if val_loss < self.best - self.min_delta:
            self.best = val_loss
            self.wait = 0
        else:
            self.wait += 1
        return self.wait >= self.patience


@dataclass
class TrainConfig:
    batch_size: int = 128
    max_epochs: int = 50
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    min_delta: float = 0.001
    patience: int = 3
    validation_fraction: float = 0.05
    hidden_units: int = 128
    class_weight: str = "balanced"
    seed: int = 0


@dataclass
class TrainHistory:
    train_losses: list = field(default_factory=list)
    val_losses: list = field(default_factory=list)
    best_epoch: int = 0
    stopped_epoch: int = 0


@dataclass
class TrainResult:
    params: dict
    history: TrainHistory
    weights: np.ndarray


def make_featurizer(
    kind: str, vocab: Vocabulary | None, window: int
) -> tuple[Callable[[np.ndarray], np.ndarray], int]:
    """Per-batch index rows to float feature rows, plus the feature width."""
    if kind == KIND_LOGREG_INDEX:
        if vocab is None or len(vocab) == 0:
            raise ValueError("index features require a non-empty vocabulary")
        scale = float(len(vocab))

        def index_features(batch: np.ndarray) -> np.ndarray:
            return batch.astype(np.float64) / scale

        return index_features, window
    if kind in (KIND_LOGREG_EMBEDDED, KIND_MLP):
        if vocab is None:
            raise ValueError("embedded features require a vocabulary")

        def embedded_features(batch: np.ndarray) -> np.ndarray:
            return embed(batch, vocab).reshape(len(batch), -1)

        return embedded_features, window * vocab.dimension
    raise ValueError(f"unknown model kind {kind!r}")


def init_params(kind: str, n_features: int, n_classes: int, config: TrainConfig) -> dict:
    rng = np.random.default_rng(config.seed)
    if kind in (KIND_LOGREG_INDEX, KIND_LOGREG_EMBEDDED):
        return {
            "W": np.zeros((n_features, n_classes)),
            "b": np.zeros(n_classes),
        }
    if kind == KIND_MLP:
        hidden = config.hidden_units
        return {
            "W1": rng.normal(0.0, np.sqrt(2.0 / n_features), (n_features, hidden)),
            "b1": np.zeros(hidden),
            "W2": rng.normal(0.0, np.sqrt(2.0 / hidden), (hidden, n_classes)),
            "b2": np.zeros(n_classes),
        }
    raise ValueError(f"unknown model kind {kind!r}")


def forward_logits(params: dict, features: np.ndarray) -> np.ndarray:
    if "W1" in params:
        hidden = np.maximum(features @ params["W1"] + params["b1"], 0.0)
        return hidden @ params["W2"] + params["b2"]
    return features @ params["W"] + params["b"]


def loss_and_grads(
    params: dict,
    features: np.ndarray,
    labels: np.ndarray,
    weights: np.ndarray,
) -> tuple[float, dict]:
    """Mean weighted cross-entropy and its analytic gradients."""
    logits = forward_logits(params, features)
    probs = softmax(logits)
    loss = weighted_cross_entropy(probs, labels, weights)
    batch = len(labels)
    delta = probs.copy()
    delta[np.arange(batch), labels] -= 1.0
    delta *= weights[labels][:, None] / batch
    if "W1" in params:
        hidden_pre = features @ params["W1"] + params["b1"]
        hidden = np.maximum(hidden_pre, 0.0)
        grad_hidden = (delta @ params["W2"].T) * (hidden_pre > 0.0)
        return loss, {
            "W1": features.T @ grad_hidden,
            "b1": grad_hidden.sum(axis=0),
            "W2": hidden.T @ delta,
            "b2": delta.sum(axis=0),
        }
    return loss, {
        "W": features.T @ delta,
        "b": delta.sum(axis=0),
    }


def _epoch_loss(params, featurize, indices, labels, weights, batch_size) -> float:
    total = 0.0
    for start in range(0, len(labels), batch_size):
        batch = slice(start, start + batch_size)
        probs = softmax(forward_logits(params, featurize(indices[batch])))
        total += weighted_cross_entropy(probs, labels[batch], weights) * len(
            labels[batch]
        )
    return total / len(labels)


def train(
    kind: str,
    indices: np.ndarray,
    labels: np.ndarray,
    n_classes: int,
    vocab: Vocabulary | None,
    config: TrainConfig | None = None,
) -> TrainResult:
    """Mini-batch training with per-epoch validation and early stopping.

    A validation slice is carved off the given data; the returned
    parameters are the snapshot from the epoch with the lowest
    validation loss.
    """
    config = config or TrainConfig()
    indices = np.asarray(indices)
    labels = np.asarray(labels)
    if len(indices) != len(labels):
        raise ValueError("one label per input row required")
    if len(labels) == 0:
        raise ValueError("empty training data")
    if len(np.unique(labels)) < 2:
        warnings.warn("training labels contain a single class")

    featurize, n_features = make_featurizer(kind, vocab, indices.shape[1])
    weights = class_weights(labels, n_classes, config.class_weight)
    params = init_params(kind, n_features, n_classes, config)

    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(labels))
    n_val = max(1, round(len(labels) * config.validation_fraction))
    n_val = min(n_val, len(labels) - 1) if len(labels) > 1 else 0
    val_idx, train_idx = order[:n_val], order[n_val:]
    if len(train_idx) == 0:
        train_idx = order
    x_val, y_val = indices[val_idx], labels[val_idx]
    x_train, y_train = indices[train_idx], labels[train_idx]

    optimizer = Adam(config.learning_rate, config.beta1, config.beta2, config.epsilon)
    stopper = EarlyStopping(config.min_delta, config.patience)
    history = TrainHistory()
    best_val = float("inf")
    best_params = copy.deepcopy(params)

    for epoch in range(1, config.max_epochs + 1):
        epoch_order = rng.permutation(len(y_train))
        running = 0.0
        for start in range(0, len(y_train), config.batch_size):
            chosen = epoch_order[start : start + config.batch_size]
            loss, grads = loss_and_grads(
                params, featurize(x_train[chosen]), y_train[chosen], weights
            )
            optimizer.step(params, grads)
            running += loss * len(chosen)
        history.train_losses.append(running / len(y_train))

        if len(y_val):
            val_loss = _epoch_loss(
                params, featurize, x_val, y_val, weights, config.batch_size
            )
        else:
            val_loss = history.train_losses[-1]
        history.val_losses.append(val_loss)
        if val_loss < best_val:
            best_val = val_loss
            best_params = copy.deepcopy(params)
            history.best_epoch = epoch
        history.stopped_epoch = epoch
        if stopper.update(val_loss):
            break

    return TrainResult(params=best_params, history=history, weights=weights)


def predict_proba(params: dict, featurize, indices: np.ndarray, batch_size: int = 128):
    rows = []
    for start in range(0, len(indices), batch_size):
        logits = forward_logits(params, featurize(indices[start : start + batch_size]))
        rows.append(softmax(logits))
    return np.vstack(rows)


class ZeroRuleClassifier(BaseEstimator, ClassifierMixin):
    """Always predicts the most frequent training class.

    Ties break toward the lowest label index. Probabilities are the
    training label distribution.
    """

    def fit(self, X, y):
        y = np.asarray(y)
        if y.size == 0:
            raise ValueError("empty training labels")
        counts = np.bincount(y)
        self.majority_ = int(counts.argmax())
        self.distribution_ = counts / counts.sum()
        self.classes_ = np.arange(len(counts))
        return self

    def predict(self, X):
        return np.full(len(X), self.majority_, dtype=np.int64)

    def predict_proba(self, X):
        return np.tile(self.distribution_, (len(X), 1))


class WindowClassifier(BaseEstimator, ClassifierMixin):
    """Trainable classifier over (n, window) index rows."""

    kind = KIND_LOGREG_INDEX

    def __init__(
        self,
        vocab: Vocabulary | None = None,
        n_classes: int = 13,
        batch_size: int = 128,
        max_epochs: int = 50,
        learning_rate: float = 0.001,
        min_delta: float = 0.001,
        patience: int = 3,
        validation_fraction: float = 0.05,
        hidden_units: int = 128,
        class_weight: str = "balanced",
        seed: int = 0,
    ):
        self.vocab = vocab
        self.n_classes = n_classes
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.learning_rate = learning_rate
        self.min_delta = min_delta
        self.patience = patience
        self.validation_fraction = validation_fraction
        self.hidden_units = hidden_units
        self.class_weight = class_weight
        self.seed = seed

    def _config(self) -> TrainConfig:
        return TrainConfig(
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            learning_rate=self.learning_rate,
            min_delta=self.min_delta,
            patience=self.patience,
            validation_fraction=self.validation_fraction,
            hidden_units=self.hidden_units,
            class_weight=self.class_weight,
            seed=self.seed,
        )

    def fit(self, X, y):
        X = np.asarray(X)
        result = train(self.kind, X, np.asarray(y), self.n_classes, self.vocab, self._config())
        self.params_ = result.params
        self.history_ = result.history
        self.class_weights_ = result.weights
        self.featurize_, _ = make_featurizer(self.kind, self.vocab, X.shape[1])
        self.classes_ = np.arange(self.n_classes)
        return self

    def predict_proba(self, X):
        return predict_proba(self.params_, self.featurize_, np.asarray(X), self.batch_size)

    def predict(self, X):
        return self.predict_proba(X).argmax(axis=1)


class IndexLogisticClassifier(WindowClassifier):
    kind = KIND_LOGREG_INDEX


class EmbeddedLogisticClassifier(WindowClassifier):
    kind = KIND_LOGREG_EMBEDDED


class MlpClassifier(WindowClassifier):
    kind = KIND_MLP
