"""Metrics in the extraction toolkit's report format.

The format is an external interface shared with the primary toolkit,
reproduced here from its documentation so the file round-trips through
the primary parser:

  # statement classification report
  classes=<k>
  samples=<n>
  micro_f1=<float>
  class<TAB>precision<TAB>recall<TAB>f1<TAB>support
  <name><TAB>...
"""

from __future__ import annotations

import numpy as np


def format_report(y_true: np.ndarray, y_pred: np.ndarray, classes: list) -> str:
    k = len(classes)
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (np.asarray(y_true), np.asarray(y_pred)), 1)
    total = counts.sum()
    micro_f1 = float(np.trace(counts) / total) if total else 0.0
    lines = [
        "# statement classification report",
        f"classes={k}",
        f"samples={int(total)}",
        f"micro_f1={micro_f1:.6f}",
        "class\tprecision\trecall\tf1\tsupport",
    ]
    for i, name in enumerate(classes):
        hit = counts[i, i]
        predicted = counts[:, i].sum()
        actual = counts[i, :].sum()
        precision = hit / predicted if predicted else 0.0
        recall = hit / actual if actual else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        lines.append(
            f"{name}\t{precision:.6f}\t{recall:.6f}\t{f1:.6f}\t{int(actual)}"
        )
    return "\n".join(lines) + "\n"
