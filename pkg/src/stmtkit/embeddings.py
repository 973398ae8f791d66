"""Pre-trained word vectors and the fixed 480-token input window.

Vocabulary indices are dense from 1; index 0 is the padding slot and owns
the all-zero vector. Out-of-vocabulary tokens are dropped with compaction,
so downstream models never see a gap where a token used to be.
"""

from __future__ import annotations

import warnings
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

WINDOW = 480


class VectorLoadError(ValueError):
    """Vector file is malformed."""


class Vocabulary:
    """Token to index map with the stacked vector matrix.

    matrix row 0 is the zero padding vector; row i is the vector of
    tokens[i-1].
    """

    def __init__(self, tokens: Sequence[str], vectors: np.ndarray):
        if vectors.ndim != 2 or vectors.shape[0] != len(tokens):
            raise ValueError("one vector per token required")
        self.tokens = list(tokens)
        self.dimension = int(vectors.shape[1])
        self.matrix = np.vstack(
            [np.zeros((1, self.dimension), dtype=np.float64), vectors.astype(np.float64)]
        )
        self.index = {token: i + 1 for i, token in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def vector(self, token: str) -> np.ndarray:
        return self.matrix[self.index[token]]


def load_vectors(path: Path) -> Vocabulary:
    """Load `token v1 ... vD` lines.

    Ragged lines raise with their line number; a repeated token keeps its
    first vector and warns.
    """
    tokens: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    dimension = None
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            parts = line.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if dimension is None:
                dimension = len(values)
                if dimension == 0:
                    raise VectorLoadError(f"{path}:{lineno}: no vector components")
            if len(values) != dimension:
                raise VectorLoadError(
                    f"{path}:{lineno}: expected {dimension} components, got {len(values)}"
                )
            if token in seen:
                warnings.warn(f"{path}:{lineno}: duplicate token {token!r}, first kept")
                continue
            try:
                row = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise VectorLoadError(f"{path}:{lineno}: {exc}") from exc
            seen.add(token)
            tokens.append(token)
            rows.append(row)
    if not tokens:
        raise VectorLoadError(f"{path}: no vectors found")
    return Vocabulary(tokens, np.vstack(rows))


def paragraph_tokens(source) -> list[str]:
    """Flatten a normalized paragraph (or pass a token list through)."""
    sentences = getattr(source, "sentences", None)
    if sentences is not None:
        return [token for sentence in sentences for token in sentence]
    return list(source)


def index_paragraph(source, vocab: Vocabulary, window: int = WINDOW) -> np.ndarray:
    """Map tokens to indices: OOV dropped compacting, truncated, 0-padded."""
    indices = [vocab.index[t] for t in paragraph_tokens(source) if t in vocab.index]
    del indices[window:]
    out = np.zeros(window, dtype=np.int64)
    out[: len(indices)] = indices
    return out


def embed(indices: np.ndarray, vocab: Vocabulary) -> np.ndarray:
    """(window, D) matrix with the stored vector per index, zeros for padding."""
    indices = np.asarray(indices)
    if indices.size and (indices.min() < 0 or indices.max() >= vocab.matrix.shape[0]):
        raise ValueError("index out of vocabulary range")
    return vocab.matrix[indices]


def mask(indices: np.ndarray) -> np.ndarray:
    return np.asarray(indices) != 0


class ParagraphVectorizer(BaseEstimator, TransformerMixin):
    """Token streams to fixed-width index rows."""

    def __init__(self, vocab: Vocabulary, window: int = WINDOW):
        self.vocab = vocab
        self.window = window

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        return np.vstack([index_paragraph(item, self.vocab, self.window) for item in X])
