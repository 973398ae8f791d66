"""Confusion matrices, scores, and confusion-driven nest proposals."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


@dataclass
class ConfusionMatrix:
    """counts[i][j] is how often class i was predicted as class j."""

    counts: np.ndarray
    names: list[str]


@dataclass
class NestProposal:
    groups: list[list[str]]
    trace: list[tuple[str, str, float]]


@dataclass
class Report:
    micro_f1: float
    samples: int
    per_class: dict


def confusion(y_true, y_pred, names: Sequence[str]) -> ConfusionMatrix:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("prediction and truth lengths differ")
    k = len(names)
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    return ConfusionMatrix(counts, list(names))


def row_normalize(matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    sums = matrix.sum(axis=1, keepdims=True)
    safe = np.where(sums == 0, 1.0, sums)
    return matrix / safe


def micro_f1(cm: ConfusionMatrix) -> float:
    total = cm.counts.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(cm.counts) / total)


def per_class_prf(cm: ConfusionMatrix) -> list[tuple[float, float, float]]:
    """(precision, recall, f1) per class; empty denominators score 0."""
    counts = cm.counts
    scores = []
    for i in range(len(cm.names)):
        hit = counts[i, i]
        predicted = counts[:, i].sum()
        actual = counts[i, :].sum()
        precision = hit / predicted if predicted else 0.0
        recall = hit / actual if actual else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        scores.append((float(precision), float(recall), float(f1)))
    return scores


def collapse_confusion(cm: ConfusionMatrix, groups: dict[str, str]) -> ConfusionMatrix:
    """Merge classes into named groups, summing their confusion mass."""
    group_names = sorted(set(groups.get(name, name) for name in cm.names))
    position = {name: i for i, name in enumerate(group_names)}
    merged = np.zeros((len(group_names), len(group_names)), dtype=cm.counts.dtype)
    for i, row_name in enumerate(cm.names):
        for j, col_name in enumerate(cm.names):
            merged[
                position[groups.get(row_name, row_name)],
                position[groups.get(col_name, col_name)],
            ] += cm.counts[i, j]
    return ConfusionMatrix(merged, group_names)


def propose_nests(cm: ConfusionMatrix, threshold: float = 0.25) -> NestProposal:
    """Group classes whose mutual confusion is heavy.

    Pair mass is max(N[i][j], N[j][i]) on the row-normalized matrix.
    Pairs at or above the threshold merge greedily, heaviest first, so
    chains of confusable classes end up in one group. The result is
    always a partition of the class set.
    """
    normalized = row_normalize(cm.counts)
    k = len(cm.names)
    parent = list(range(k))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    pairs = []
    for i in range(k):
        for j in range(i + 1, k):
            mass = max(normalized[i, j], normalized[j, i])
            if mass >= threshold:
                pairs.append((-mass, i, j))
    pairs.sort()

    trace = []
    for negative_mass, i, j in pairs:
        root_i, root_j = find(i), find(j)
        if root_i != root_j:
            parent[max(root_i, root_j)] = min(root_i, root_j)
            trace.append((cm.names[i], cm.names[j], float(-negative_mass)))

    grouped: dict[int, list[str]] = {}
    for i in range(k):
        grouped.setdefault(find(i), []).append(cm.names[i])
    groups = sorted(sorted(members) for members in grouped.values())
    return NestProposal(groups=groups, trace=trace)


def format_confusion(cm: ConfusionMatrix) -> str:
    lines = ["class\t" + "\t".join(cm.names)]
    for name, row in zip(cm.names, cm.counts):
        lines.append(name + "\t" + "\t".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def parse_confusion(text: str) -> ConfusionMatrix:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty confusion matrix text")
    header = lines[0].split("\t")
    if header[0] != "class":
        raise ValueError("confusion matrix header must start with 'class'")
    names = header[1:]
    counts = np.zeros((len(names), len(names)), dtype=np.int64)
    if len(lines) != len(names) + 1:
        raise ValueError(f"expected {len(names)} rows, got {len(lines) - 1}")
    for row_index, line in enumerate(lines[1:]):
        cells = line.split("\t")
        if cells[0] != names[row_index]:
            raise ValueError(f"row {cells[0]!r} out of order")
        if len(cells) != len(names) + 1:
            raise ValueError(f"row {cells[0]!r} has {len(cells) - 1} columns")
        counts[row_index] = [int(v) for v in cells[1:]]
    return ConfusionMatrix(counts, names)


def format_report(cm: ConfusionMatrix) -> str:
    scores = per_class_prf(cm)
    supports = cm.counts.sum(axis=1)
    lines = [
        "# statement classification report",
        f"classes={len(cm.names)}",
        f"samples={int(cm.counts.sum())}",
        f"micro_f1={micro_f1(cm):.6f}",
        "class\tprecision\trecall\tf1\tsupport",
    ]
    for name, (precision, recall, f1), support in zip(cm.names, scores, supports):
        lines.append(
            f"{name}\t{precision:.6f}\t{recall:.6f}\t{f1:.6f}\t{int(support)}"
        )
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> Report:
    micro = None
    samples = None
    per_class = {}
    in_table = False
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        if line.startswith("class\t"):
            in_table = True
            continue
        if in_table:
            name, precision, recall, f1, support = line.split("\t")
            per_class[name] = (float(precision), float(recall), float(f1), int(support))
        elif "=" in line:
            key, value = line.split("=", 1)
            if key == "micro_f1":
                micro = float(value)
            elif key == "samples":
                samples = int(value)
    if micro is None or samples is None:
        raise ValueError("report is missing micro_f1 or samples")
    return Report(micro_f1=micro, samples=samples, per_class=per_class)


def write_heatmap(cm: ConfusionMatrix, path: Path) -> None:
    """Row-normalized confusion rendered as a self-contained SVG grid."""
    normalized = row_normalize(cm.counts)
    k = len(cm.names)
    cell = 24
    margin = 110
    size = margin + k * cell + 10
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'font-family="monospace" font-size="10">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for i, name in enumerate(cm.names):
        y = margin + i * cell + cell // 2 + 3
        parts.append(f'<text x="4" y="{y}">{name}</text>')
        x = margin + i * cell + cell // 2
        parts.append(
            f'<text x="{x}" y="{margin - 6}" transform="rotate(-60 {x} {margin - 6})">'
            f"{name}</text>"
        )
    for i in range(k):
        for j in range(k):
            shade = int(round(255 * (1.0 - normalized[i, j])))
            color = f"rgb({shade},{shade},{shade})"
            parts.append(
                f'<rect x="{margin + j * cell}" y="{margin + i * cell}" '
                f'width="{cell}" height="{cell}" fill="{color}" stroke="#ccc"/>'
            )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
