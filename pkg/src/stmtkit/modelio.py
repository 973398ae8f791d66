"""Versioned binary container for trained models.

Layout: an 8-byte magic, a little-endian uint32 header length, a JSON
header naming the kind, window, classes, vocabulary size, and array
shapes, then each array's float64 row-major bytes in header order,
then the vocabulary vectors and a newline-joined token blob.

Everything a prediction needs travels in the file, vectors included,
so a model loads without the original vector file.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embeddings import Vocabulary, index_paragraph
from .models import (
    KIND_ZERO_RULE,
    forward_logits,
    make_featurizer,
    softmax,
)

MAGIC = b"STMTKIT\x01"


class ModelFormatError(ValueError):
    """Model file is not readable as this container format."""


@dataclass
class ModelBundle:
    """A loaded model plus everything needed to run it on raw tokens."""

    kind: str
    window: int
    classes: list[str]
    params: dict
    vocab: Vocabulary | None

    def predict_matrix(self, indices: np.ndarray, batch_size: int = 128) -> np.ndarray:
        """Probabilities for a whole (n, window) index matrix, batched."""
        if self.kind == KIND_ZERO_RULE:
            return np.tile(self.params["distribution"], (len(indices), 1))
        featurize, _ = make_featurizer(self.kind, self.vocab, self.window)
        rows = []
        for start in range(0, len(indices), batch_size):
            logits = forward_logits(
                self.params, featurize(indices[start : start + batch_size])
            )
            rows.append(softmax(logits))
        return np.vstack(rows)

    def predict_tokens(self, tokens) -> tuple[str, np.ndarray]:
        """Classify one token sequence; returns (label, probabilities)."""
        if self.kind == KIND_ZERO_RULE:
            probs = self.params["distribution"]
            return self.classes[int(probs.argmax())], probs
        indices = index_paragraph(tokens, self.vocab, self.window)
        probs = self.predict_matrix(indices[None, :])[0]
        return self.classes[int(probs.argmax())], probs


def classify_text(bundle: ModelBundle, text: str) -> tuple[str, np.ndarray, int]:
    """Shared classify path: raw text in, (label, probs, token count) out.

    Raw text carries no formula markup, so normalization sees it as
    math-free narrative.
    """
    from .normalize import normalize_text

    para = normalize_text(text)
    tokens = [token for sentence in para.sentences for token in sentence]
    label, probs = bundle.predict_tokens(tokens)
    return label, probs, len(tokens)


def save_model(
    path: Path,
    kind: str,
    params: dict,
    classes: list[str],
    window: int,
    vocab: Vocabulary | None = None,
) -> None:
    array_names = sorted(params)
    header = {
        "kind": kind,
        "window": window,
        "classes": list(classes),
        "arrays": [
            {"name": name, "shape": list(params[name].shape)} for name in array_names
        ],
        "vocab_size": len(vocab) if vocab is not None else 0,
        "dimension": vocab.dimension if vocab is not None else 0,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<I", len(header_bytes)))
        handle.write(header_bytes)
        for name in array_names:
            handle.write(np.ascontiguousarray(params[name], dtype=np.float64).tobytes())
        if vocab is not None:
            handle.write(
                np.ascontiguousarray(vocab.matrix[1:], dtype=np.float64).tobytes()
            )
            tokens_blob = "\n".join(vocab.tokens).encode("utf-8")
        else:
            tokens_blob = b""
        handle.write(struct.pack("<Q", len(tokens_blob)))
        handle.write(tokens_blob)


def _read_exact(handle, count: int, what: str) -> bytes:
    data = handle.read(count)
    if len(data) != count:
        raise ModelFormatError(f"truncated model file while reading {what}")
    return data


def load_model(path: Path) -> ModelBundle:
    with open(path, "rb") as handle:
        if _read_exact(handle, len(MAGIC), "magic") != MAGIC:
            raise ModelFormatError(f"{path}: not a model file of a supported version")
        (header_len,) = struct.unpack("<I", _read_exact(handle, 4, "header length"))
        try:
            header = json.loads(_read_exact(handle, header_len, "header"))
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: corrupt header") from exc
        params = {}
        for spec in header["arrays"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = _read_exact(handle, count * 8, f"array {spec['name']}")
            params[spec["name"]] = (
                np.frombuffer(raw, dtype=np.float64).reshape(shape).copy()
            )
        vocab = None
        rows, dimension = header["vocab_size"], header["dimension"]
        if rows:
            raw = _read_exact(handle, rows * dimension * 8, "vocabulary matrix")
            matrix = np.frombuffer(raw, dtype=np.float64).reshape(rows, dimension).copy()
        (blob_len,) = struct.unpack("<Q", _read_exact(handle, 8, "token blob length"))
        tokens_blob = _read_exact(handle, blob_len, "tokens")
        if rows:
            tokens = tokens_blob.decode("utf-8").split("\n")
            if len(tokens) != rows:
                raise ModelFormatError(
                    f"{path}: {rows} vectors but {len(tokens)} tokens"
                )
            vocab = Vocabulary(tokens, matrix)
    return ModelBundle(
        kind=header["kind"],
        window=header["window"],
        classes=header["classes"],
        params=params,
        vocab=vocab,
    )
