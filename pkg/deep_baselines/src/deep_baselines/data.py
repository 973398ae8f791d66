"""Reader for the exported token-index dataset tree.

The tree is produced by the extraction toolkit's ``split --export``:

  meta.txt            key=value: window, dimension, classes, vocab_size,
                      train_files, test_files
  vocab.txt           one token per line, 1-based line number = index
  embedding.txt       ``token v1 ... vD`` lines in vocab.txt order
  labels.txt          ``<class-index> <name>`` per line
  train/<nest>/<label>/<hash>.idx
  test/<nest>/<label>/<hash>.idx
                      one line of space-separated indices, unpadded

Any violation raises ExportFormatError naming what is missing or wrong.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

REQUIRED_META = (
    "window",
    "dimension",
    "classes",
    "vocab_size",
    "train_files",
    "test_files",
)


class ExportFormatError(ValueError):
    """Export tree is missing a file or field, or is inconsistent."""


@dataclass
class Side:
    """One split side: ragged index sequences with their class indices."""

    sequences: list
    labels: np.ndarray
    files: list


@dataclass
class ExportData:
    window: int
    dimension: int
    classes: list
    vocab_size: int
    embedding: np.ndarray
    train: Side
    test: Side


def _read_meta(root: Path) -> dict:
    path = root / "meta.txt"
    if not path.is_file():
        raise ExportFormatError(f"{root}: meta.txt is missing")
    fields = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            fields[key] = value
    for key in REQUIRED_META:
        if key not in fields:
            raise ExportFormatError(f"{path}: missing field {key!r}")
    return fields


def _read_labels(root: Path, n_classes: int) -> list:
    path = root / "labels.txt"
    if not path.is_file():
        raise ExportFormatError(f"{root}: labels.txt is missing")
    classes = [None] * n_classes
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        index_text, _, name = line.partition(" ")
        index = int(index_text)
        if not 0 <= index < n_classes or not name:
            raise ExportFormatError(f"{path}: bad label line {line!r}")
        classes[index] = name
    if any(name is None for name in classes):
        raise ExportFormatError(f"{path}: class indices are not dense")
    return classes


def _read_embedding(root: Path, vocab_size: int, dimension: int) -> np.ndarray:
    vocab_path = root / "vocab.txt"
    embedding_path = root / "embedding.txt"
    for path in (vocab_path, embedding_path):
        if not path.is_file():
            raise ExportFormatError(f"{root}: {path.name} is missing")
    tokens = vocab_path.read_text(encoding="utf-8").splitlines()
    if len(tokens) != vocab_size:
        raise ExportFormatError(
            f"{vocab_path}: {len(tokens)} tokens, meta says vocab_size={vocab_size}"
        )
    matrix = np.zeros((vocab_size + 1, dimension), dtype=np.float32)
    with open(embedding_path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            parts = line.split()
            if not parts:
                continue
            if lineno > vocab_size:
                raise ExportFormatError(f"{embedding_path}: more lines than vocab.txt")
            if parts[0] != tokens[lineno - 1]:
                raise ExportFormatError(
                    f"{embedding_path}:{lineno}: token {parts[0]!r} does not match "
                    f"vocab.txt order"
                )
            if len(parts) - 1 != dimension:
                raise ExportFormatError(
                    f"{embedding_path}:{lineno}: expected {dimension} components, "
                    f"got {len(parts) - 1}"
                )
            matrix[lineno] = [float(v) for v in parts[1:]]
    return matrix


def _read_side(root: Path, side: str, classes: list, vocab_size: int) -> Side:
    directory = root / side
    if not directory.is_dir():
        raise ExportFormatError(f"{root}: {side}/ directory is missing")
    class_index = {name: i for i, name in enumerate(classes)}
    sequences, labels, files = [], [], []
    for path in sorted(directory.rglob("*.idx")):
        nest = path.relative_to(directory).parts[0]
        if nest not in class_index:
            raise ExportFormatError(f"{path}: unknown class directory {nest!r}")
        text = path.read_text(encoding="utf-8").strip()
        values = [int(v) for v in text.split()] if text else []
        for value in values:
            if not 1 <= value <= vocab_size:
                raise ExportFormatError(f"{path}: index {value} out of range")
        sequences.append(np.array(values, dtype=np.int64))
        labels.append(class_index[nest])
        files.append(path)
    return Side(sequences=sequences, labels=np.array(labels, dtype=np.int64), files=files)


def load_export(root: Path) -> ExportData:
    root = Path(root)
    meta = _read_meta(root)
    window = int(meta["window"])
    dimension = int(meta["dimension"])
    n_classes = int(meta["classes"])
    vocab_size = int(meta["vocab_size"])
    classes = _read_labels(root, n_classes)
    embedding = _read_embedding(root, vocab_size, dimension)
    train = _read_side(root, "train", classes, vocab_size)
    test = _read_side(root, "test", classes, vocab_size)
    for side_name, side, expected_key in (
        ("train", train, "train_files"),
        ("test", test, "test_files"),
    ):
        expected = int(meta[expected_key])
        if len(side.files) != expected:
            raise ExportFormatError(
                f"{root}: {side_name}/ holds {len(side.files)} files, "
                f"meta says {expected_key}={expected}"
            )
    return ExportData(
        window=window,
        dimension=dimension,
        classes=classes,
        vocab_size=vocab_size,
        embedding=embedding,
        train=train,
        test=test,
    )


def pad_batch(sequences, window: int) -> np.ndarray:
    """Stack ragged index sequences into a zero-padded (n, window) matrix."""
    out = np.zeros((len(sequences), window), dtype=np.int64)
    for row, seq in enumerate(sequences):
        clipped = seq[:window]
        out[row, : len(clipped)] = clipped
    return out
