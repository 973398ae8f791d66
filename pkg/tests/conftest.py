"""Shared fixtures: one extracted dataset and a vector file covering it."""

from pathlib import Path

import numpy as np
import pytest

from stmtkit.dataset import dataset_files, extract_corpus

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def corpus_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("dataset")
    extract_corpus(FIXTURES / "corpus", out, jobs=1)
    return out


@pytest.fixture(scope="session")
def vector_file(tmp_path_factory, corpus_dataset):
    """Synthetic vectors for every token the fixture dataset contains."""
    rng = np.random.default_rng(99)
    tokens = sorted(
        {
            token
            for path in dataset_files(corpus_dataset)
            for token in path.read_text(encoding="utf-8").split()
        }
    )
    path = tmp_path_factory.mktemp("vectors") / "vectors.txt"
    lines = [
        token + " " + " ".join(f"{value:.6f}" for value in rng.normal(size=12)) + "\n"
        for token in tokens
    ]
    path.write_text("".join(lines), encoding="utf-8")
    return path
