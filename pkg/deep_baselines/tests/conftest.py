"""Shared fixtures: a toy ordering corpus pushed through the primary CLI.

The corpus labels each paragraph by the exclusive-or of two token-order
bits (alpha before beta, gamma before delta) crossed with a color token,
plus a marker-free class. Position-flattened linear models cannot
express the exclusive-or of orders, while sequence models can, so the
corpus separates the two model families by design.
"""

import hashlib
import random
import shutil
import subprocess
import sys

import pytest

MARKERS = ["alpha", "beta", "gamma", "delta"]
COLORS = ["crimson", "viridian"]
FILLERS = [f"filler{i}" for i in range(8)]
ORDER_LABELS = {
    (0, "crimson"): "definition",
    (0, "viridian"): "example",
    (1, "crimson"): "proof",
    (1, "viridian"): "remark",
}
FILLER_LABEL = "theorem"
PER_CLASS = 120
WINDOW = 16
DIMENSION = 8


def run_primary_cli(*args, cwd=None):
    """Invoke the installed primary command line as a subprocess."""
    exe = shutil.which("stmtkit")
    command = [exe] if exe else [sys.executable, "-m", "stmtkit.cli"]
    return subprocess.run(
        command + [str(a) for a in args],
        capture_output=True,
        text=True,
        cwd=cwd,
        check=True,
    )


def parse_summary(stdout):
    """Fields of the single SUMMARY line a primary command prints."""
    lines = [l for l in stdout.splitlines() if l.startswith("SUMMARY ")]
    assert len(lines) == 1, stdout
    fields = {}
    for part in lines[0].split()[2:]:
        key, _, value = part.partition("=")
        fields[key] = value
    return fields


def _make_sample(rng):
    color = rng.choice(COLORS)
    if rng.random() < 0.2:
        return FILLER_LABEL, [color] + [rng.choice(FILLERS) for _ in range(11)]
    body = [rng.choice(FILLERS) for _ in range(11)]
    slots = rng.sample(range(11), 4)
    for slot, marker in zip(slots, MARKERS):
        body[slot] = marker
    u = body.index("alpha") < body.index("beta")
    v = body.index("gamma") < body.index("delta")
    return ORDER_LABELS[(int(u) ^ int(v), color)], [color] + body


def build_toy_corpus(root, seed=7, per_class=PER_CLASS):
    """Write a balanced five-class corpus in the primary dataset layout."""
    rng = random.Random(seed)
    counts = dict.fromkeys([*ORDER_LABELS.values(), FILLER_LABEL], 0)
    while min(counts.values()) < per_class:
        label, tokens = _make_sample(rng)
        if counts[label] >= per_class:
            continue
        data = (" ".join(tokens) + "\n").encode("utf-8")
        directory = root / label
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / (hashlib.sha256(data).hexdigest() + ".txt")
        if path.exists():
            continue
        path.write_bytes(data)
        counts[label] += 1
    return counts


def write_toy_vectors(path, seed=7, dim=DIMENSION):
    """Markers and colors get signed axes; fillers live in the rest."""
    axes = {
        "alpha": (0, 1.0),
        "beta": (0, -1.0),
        "gamma": (1, 1.0),
        "delta": (1, -1.0),
        "crimson": (2, 1.0),
        "viridian": (2, -1.0),
    }
    rng = random.Random(seed)
    lines = []
    for token, (axis, sign) in axes.items():
        vec = [0.0] * dim
        vec[axis] = sign
        lines.append(token + " " + " ".join(f"{x:.6f}" for x in vec))
    for token in FILLERS:
        vec = [0.0] * dim
        for i in range(4, dim):
            vec[i] = rng.uniform(-0.5, 0.5)
        lines.append(token + " " + " ".join(f"{x:.6f}" for x in vec))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


@pytest.fixture(scope="session")
def toy_workspace(tmp_path_factory):
    """Corpus, vector file, and a primary-CLI export under one root."""
    work = tmp_path_factory.mktemp("toy")
    build_toy_corpus(work / "corpus")
    write_toy_vectors(work / "vectors.txt")
    run_primary_cli(
        "split",
        "--dataset", work / "corpus",
        "--export", work / "export",
        "--vectors", work / "vectors.txt",
        "--window", WINDOW,
    )
    return work


@pytest.fixture(scope="session")
def toy_export(toy_workspace):
    from deep_baselines.data import load_export

    return load_export(toy_workspace / "export")


@pytest.fixture(scope="session")
def primary_cli():
    return run_primary_cli


@pytest.fixture(scope="session")
def summary_fields():
    return parse_summary
