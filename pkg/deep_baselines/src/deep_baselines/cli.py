"""Command-line front end for the deep baselines."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path


def _summary(command: str, **fields) -> None:
    parts = [f"SUMMARY {command}"]
    for key, value in fields.items():
        if isinstance(value, float):
            parts.append(f"{key}={value:.6f}")
        else:
            parts.append(f"{key}={value}")
    print(" ".join(parts))


def cmd_train(args) -> int:
    from .data import load_export
    from .report import format_report
    from .train import score, train_model

    data = load_export(Path(args.export))
    result = train_model(
        args.arch,
        data,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        min_delta=args.min_delta,
        patience=args.patience,
        validation_fraction=args.validation_fraction,
        sentences=args.sentences,
        seed=args.seed,
    )
    result.model.save(args.model)
    micro_f1, y_true, y_pred = score(result.model, data, data.test)
    if args.report:
        Path(args.report).write_text(
            format_report(y_true, y_pred, data.classes), encoding="utf-8"
        )
    _summary(
        "train",
        arch=args.arch,
        epochs=result.epochs_run,
        test_micro_f1=micro_f1,
        model=args.model,
    )
    return 0


def cmd_evaluate(args) -> int:
    import keras

    from .data import load_export
    from .report import format_report
    from .train import score

    data = load_export(Path(args.export))
    model = keras.saving.load_model(args.model)
    side = data.train if args.split == "train" else data.test
    micro_f1, y_true, y_pred = score(model, data, side)
    if args.report:
        Path(args.report).write_text(
            format_report(y_true, y_pred, data.classes), encoding="utf-8"
        )
    _summary("evaluate", micro_f1=micro_f1, samples=len(y_true), split=args.split)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deep-baselines",
        description="Recurrent and attention baselines over exported datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one architecture on an export tree")
    p.add_argument("--export", required=True, help="export tree directory")
    p.add_argument("--arch", choices=["bilstm-encdec", "han"], required=True)
    p.add_argument("--model", required=True, help="output .keras file")
    p.add_argument("--report", help="write a test-split report here")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--learning-rate", type=float, default=0.001)
    p.add_argument("--min-delta", type=float, default=0.001)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--validation-fraction", type=float, default=0.05)
    p.add_argument("--sentences", type=int, default=8, help="rows in the han view")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a saved model on an export split")
    p.add_argument("--export", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--split", choices=["train", "test"], default="test")
    p.add_argument("--report")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
