"""Command-line front end.

Eight subcommands cover the pipeline end to end: extract, stats,
split, train, evaluate, nests, classify, serve. Every run ends with a
single machine-readable SUMMARY line on stdout.

The ``split --export`` tree is the hand-off format for downstream
(deep) baselines:

  meta.txt            key=value: window, dimension, classes, counts
  vocab.txt           one token per line; its 1-based line number is
                      the token's index (0 is reserved for padding)
  embedding.txt       ``token v1 ... vD`` lines, same order as vocab.txt
  labels.txt          ``<class-index> <nest-name>`` per line
  train/<nest>/<label>/<hash>.idx
  test/<nest>/<label>/<hash>.idx
                      one line of space-separated token indices per
                      paragraph, vocabulary misses dropped, truncated
                      to the window, not padded (may be empty); the
                      label level keeps same-text paragraphs that
                      landed in one nest under different raw labels
                      apart
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import evaluation as ev
from .embeddings import WINDOW, Vocabulary, index_paragraph, load_vectors
from .modelio import classify_text, load_model, save_model
from .models import (
    KIND_LOGREG_EMBEDDED,
    KIND_LOGREG_INDEX,
    KIND_MLP,
    KIND_ZERO_RULE,
    TrainConfig,
    train,
)
from .taxonomy import Taxonomy, load_taxonomy


def _summary(command: str, **fields) -> None:
    parts = [f"SUMMARY {command}"]
    for key, value in fields.items():
        if isinstance(value, float):
            parts.append(f"{key}={value:.6f}")
        else:
            parts.append(f"{key}={value}")
    print(" ".join(parts))


def _nest_files(root: Path, taxonomy: Taxonomy) -> list[tuple[Path, str]]:
    view = ds.regroup_to_nests(root, taxonomy)
    pairs = []
    for nest_name in taxonomy.nest_names:
        for path in view.groups[nest_name]:
            pairs.append((path, nest_name))
    pairs.sort(key=lambda item: item[0])
    return pairs


def _split_pairs(pairs, ratio):
    train_files, _ = ds.split_train_test([p for p, _ in pairs], ratio)
    train_set = set(train_files)
    train_side = [(p, n) for p, n in pairs if p in train_set]
    test_side = [(p, n) for p, n in pairs if p not in train_set]
    return train_side, test_side


def _file_tokens(path: Path) -> list[str]:
    return path.read_text(encoding="utf-8").split()


def _index_matrix(pairs, vocab: Vocabulary, window: int) -> np.ndarray:
    rows = [index_paragraph(_file_tokens(path), vocab, window) for path, _ in pairs]
    if not rows:
        return np.zeros((0, window), dtype=np.int64)
    return np.vstack(rows)


def _label_vector(pairs, taxonomy: Taxonomy) -> np.ndarray:
    return np.array([taxonomy.nest_index(nest) for _, nest in pairs], dtype=np.int64)


# -- subcommands --------------------------------------------------------------


def cmd_extract(args) -> int:
    taxonomy = load_taxonomy(args.taxonomy) if args.taxonomy else None
    mode = ds.MODE_NO_MATH if args.no_math else ds.MODE_WITH_MATH
    manifest = ds.extract_corpus(
        Path(args.input), Path(args.output), taxonomy=taxonomy, mode=mode, jobs=args.jobs
    )
    _summary(
        "extract",
        documents=manifest.documents,
        paragraphs=manifest.paragraphs,
        labels=len(manifest.labels),
        skipped=sum(manifest.skips.values()),
        mode=manifest.mode,
    )
    return 0


def cmd_stats(args) -> int:
    stats = ds.compute_stats(Path(args.dataset))
    count = len(ds.dataset_files(Path(args.dataset)))
    _summary(
        "stats",
        paragraphs=count,
        mean_words=stats.mean_words,
        median_words=stats.median_words,
        coverage_480=stats.coverage_480,
    )
    return 0


def _write_export(args, taxonomy: Taxonomy, train_side, test_side) -> None:
    vocab = load_vectors(Path(args.vectors))
    export = Path(args.export)
    export.mkdir(parents=True, exist_ok=True)
    (export / "vocab.txt").write_text(
        "".join(token + "\n" for token in vocab.tokens), encoding="utf-8"
    )
    with open(export / "embedding.txt", "w", encoding="utf-8") as handle:
        for token in vocab.tokens:
            values = " ".join(repr(float(v)) for v in vocab.vector(token))
            handle.write(f"{token} {values}\n")
    (export / "labels.txt").write_text(
        "".join(
            f"{taxonomy.nest_index(name)} {name}\n" for name in taxonomy.nest_names
        ),
        encoding="utf-8",
    )
    for side, pairs in (("train", train_side), ("test", test_side)):
        for path, nest in pairs:
            indices = [
                vocab.index[t] for t in _file_tokens(path) if t in vocab.index
            ][: args.window]
            target = export / side / nest / path.parent.name
            target.mkdir(parents=True, exist_ok=True)
            (target / f"{path.stem}.idx").write_text(
                " ".join(str(i) for i in indices) + "\n", encoding="utf-8"
            )
    meta = [
        f"window={args.window}",
        f"dimension={vocab.dimension}",
        f"classes={len(taxonomy.nest_names)}",
        f"vocab_size={len(vocab)}",
        f"train_files={len(train_side)}",
        f"test_files={len(test_side)}",
        f"ratio={args.ratio:.6f}",
    ]
    (export / "meta.txt").write_text(
        "".join(line + "\n" for line in meta), encoding="utf-8"
    )


def cmd_split(args) -> int:
    root = Path(args.dataset)
    taxonomy = load_taxonomy(args.taxonomy) if args.taxonomy else load_taxonomy()
    pairs = _nest_files(root, taxonomy)
    train_side, test_side = _split_pairs(pairs, args.ratio)
    if args.emit_lists:
        for name, side in (("train.lst", train_side), ("test.lst", test_side)):
            (root / name).write_text(
                "".join(
                    path.relative_to(root).as_posix() + "\n" for path, _ in side
                ),
                encoding="utf-8",
            )
    if args.export:
        _write_export(args, taxonomy, train_side, test_side)
    _summary(
        "split",
        train=len(train_side),
        test=len(test_side),
        ratio=args.ratio,
        exported=args.export or "-",
    )
    return 0


def cmd_train(args) -> int:
    taxonomy = load_taxonomy(args.taxonomy) if args.taxonomy else load_taxonomy()
    pairs = _nest_files(Path(args.dataset), taxonomy)
    train_side, _ = _split_pairs(pairs, args.ratio)
    if not train_side:
        print("error: no training paragraphs after the split", file=sys.stderr)
        return 1
    labels = _label_vector(train_side, taxonomy)
    classes = taxonomy.nest_names
    if args.kind == KIND_ZERO_RULE:
        counts = np.bincount(labels, minlength=len(classes)).astype(np.float64)
        params = {"distribution": counts / counts.sum()}
        save_model(Path(args.model), args.kind, params, classes, args.window, vocab=None)
        _summary(
            "train",
            kind=args.kind,
            train=len(labels),
            epochs=0,
            best_epoch=0,
            val_loss=float("nan"),
            model=args.model,
        )
        return 0
    if not args.vectors:
        print("error: --vectors is required for trainable kinds", file=sys.stderr)
        return 1
    vocab = load_vectors(Path(args.vectors))
    matrix = _index_matrix(train_side, vocab, args.window)
    config = TrainConfig(
        batch_size=args.batch_size,
        max_epochs=args.epochs,
        learning_rate=args.learning_rate,
        min_delta=args.min_delta,
        patience=args.patience,
        validation_fraction=args.validation_fraction,
        hidden_units=args.hidden_units,
        class_weight=args.class_weights,
        seed=args.seed,
    )
    result = train(args.kind, matrix, labels, len(classes), vocab, config)
    save_model(Path(args.model), args.kind, result.params, classes, args.window, vocab)
    _summary(
        "train",
        kind=args.kind,
        train=len(labels),
        epochs=result.history.stopped_epoch,
        best_epoch=result.history.best_epoch,
        val_loss=min(result.history.val_losses),
        model=args.model,
    )
    return 0


def cmd_evaluate(args) -> int:
    bundle = load_model(Path(args.model))
    taxonomy = load_taxonomy(args.taxonomy) if args.taxonomy else load_taxonomy()
    pairs = _nest_files(Path(args.dataset), taxonomy)
    train_side, test_side = _split_pairs(pairs, args.ratio)
    chosen = {"train": train_side, "test": test_side, "all": pairs}[args.split]
    if not chosen:
        print("error: no paragraphs in the selected split", file=sys.stderr)
        return 1
    name_to_index = {name: i for i, name in enumerate(bundle.classes)}
    y_true = np.array([name_to_index[nest] for _, nest in chosen])
    probs = bundle.predict_matrix(
        _index_matrix(chosen, bundle.vocab, bundle.window)
        if bundle.vocab is not None
        else np.zeros((len(chosen), bundle.window), dtype=np.int64)
    )
    y_pred = probs.argmax(axis=1)
    cm = ev.confusion(y_true, y_pred, bundle.classes)
    if args.confusion:
        Path(args.confusion).write_text(ev.format_confusion(cm), encoding="utf-8")
    if args.report:
        Path(args.report).write_text(ev.format_report(cm), encoding="utf-8")
    if args.heatmap:
        ev.write_heatmap(cm, Path(args.heatmap))
    _summary(
        "evaluate",
        micro_f1=ev.micro_f1(cm),
        samples=len(y_true),
        split=args.split,
    )
    return 0


def cmd_nests(args) -> int:
    cm = ev.parse_confusion(Path(args.confusion).read_text(encoding="utf-8"))
    proposal = ev.propose_nests(cm, threshold=args.threshold)
    for group in proposal.groups:
        print("group: " + " ".join(group))
    for left, right, mass in proposal.trace:
        print(f"merge: {left} {right} {mass:.6f}")
    _summary(
        "nests",
        groups=len(proposal.groups),
        merges=len(proposal.trace),
        threshold=args.threshold,
    )
    return 0


def cmd_classify(args) -> int:
    bundle = load_model(Path(args.model))
    if args.text and args.text != "-":
        text = Path(args.text).read_text(encoding="utf-8")
    else:
        text = sys.stdin.read()
    if not text.strip():
        print("error: empty input", file=sys.stderr)
        return 1
    label, probs, token_count = classify_text(bundle, text)
    print(f"label={label}")
    print(f"tokens={token_count}")
    for name, prob in zip(bundle.classes, probs):
        print(f"prob.{name}={prob:.6f}")
    _summary("classify", label=label, confidence=float(probs.max()))
    return 0


def cmd_serve(args) -> int:
    from . import service

    bundle = load_model(Path(args.model))
    served = service.run(bundle, args.host, args.port, max_requests=args.max_requests)
    _summary("serve", requests=served)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stmtkit",
        description="Scholarly statement extraction and nest classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="build a labeled dataset from documents")
    p.add_argument("--input", required=True, help="directory of source documents")
    p.add_argument("--output", required=True, help="dataset directory to create")
    p.add_argument("--taxonomy", help="alternate taxonomy config")
    p.add_argument("--no-math", action="store_true", help="drop formula content")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("stats", help="dataset length statistics")
    p.add_argument("--dataset", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="deterministic train/test split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--taxonomy")
    p.add_argument(
        "--emit-lists",
        action="store_true",
        help="write train.lst and test.lst into the dataset directory",
    )
    p.add_argument(
        "--export",
        help="write the token-index export tree for downstream baselines",
    )
    p.add_argument("--vectors", help="word vector file (required with --export)")
    p.add_argument("--window", type=int, default=WINDOW)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train a baseline classifier")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True, help="output model file")
    p.add_argument(
        "--kind",
        choices=[KIND_ZERO_RULE, KIND_LOGREG_INDEX, KIND_LOGREG_EMBEDDED, KIND_MLP],
        default=KIND_LOGREG_EMBEDDED,
    )
    p.add_argument("--vectors", help="word vector file")
    p.add_argument("--taxonomy")
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--window", type=int, default=WINDOW)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--learning-rate", type=float, default=0.001)
    p.add_argument("--min-delta", type=float, default=0.001)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--validation-fraction", type=float, default=0.05)
    p.add_argument("--hidden-units", type=int, default=128)
    p.add_argument("--class-weights", choices=["balanced", "uniform"], default="balanced")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a model on a dataset split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--taxonomy")
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--split", choices=["train", "test", "all"], default="test")
    p.add_argument("--confusion", help="write the confusion matrix here")
    p.add_argument("--report", help="write the per-class report here")
    p.add_argument("--heatmap", help="write a row-normalized SVG heatmap here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("nests", help="propose class groups from a confusion matrix")
    p.add_argument("--confusion", required=True, help="confusion matrix file")
    p.add_argument("--threshold", type=float, default=0.25)
    p.set_defaults(func=cmd_nests)

    p = sub.add_parser("classify", help="classify one paragraph of plain text")
    p.add_argument("--model", required=True)
    p.add_argument("--text", help="input file, '-' or absent for stdin")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("serve", help="run the classification HTTP service")
    p.add_argument("--model", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8300)
    p.add_argument(
        "--max-requests",
        type=int,
        default=None,
        help="stop after this many requests (mainly for smoke tests)",
    )
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
