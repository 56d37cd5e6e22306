"""Trainer command line: fit the pointer model on a pricing dataset and
export NNCG1 weights (and, optionally, golden parity vectors)."""

from __future__ import annotations

import argparse
import sys

from .data import load_dataset
from .export import emit_golden, export_weights
from .model import TrainConfig
from .train import eval_accuracy, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgtrain", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    fit = sub.add_parser("train", help="train and export weights")
    fit.add_argument("--dataset", required=True, help="JSONL pricing records")
    fit.add_argument("--out", required=True, help="NNCG1 output path")
    fit.add_argument("--d", type=int, default=64)
    fit.add_argument("--heads", type=int, default=8)
    fit.add_argument("--enc-layers", type=int, default=2)
    fit.add_argument("--dec-layers", type=int, default=2)
    fit.add_argument("--dropout", type=float, default=0.0)
    fit.add_argument("--weight-decay", type=float, default=1e-6)
    fit.add_argument("--batch-size", type=int, default=16)
    fit.add_argument("--lr", type=float, default=1e-4)
    fit.add_argument("--epochs", type=int, default=150)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--golden-out", default=None, help="also write parity vectors")
    fit.add_argument("--golden-count", type=int, default=10)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = TrainConfig(
        d=args.d,
        h=args.heads,
        n_enc=args.enc_layers,
        n_dec=args.dec_layers,
        dropout=args.dropout,
        weight_decay=args.weight_decay,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        epochs=args.epochs,
        seed=args.seed,
    )
    try:
        split = load_dataset(args.dataset)
    except (OSError, ValueError) as exc:
        print(f"cgtrain: {exc}", file=sys.stderr)
        return 2
    print(f"records: {len(split.train)} train / {len(split.validation)} validation")

    def log(epoch, loss, val):
        print(f"epoch {epoch:>3}  train loss {loss:.4f}  val accuracy {val:.2f}%")

    model = train(config, split, log=log)
    export_weights(model, config, args.out)
    print(f"wrote {args.out}")
    if split.validation:
        print(f"final validation accuracy: {eval_accuracy(model, split.validation, config):.2f}%")
    if args.golden_out:
        pool = (split.validation or split.train)[: args.golden_count]
        count = emit_golden(model, pool, config, args.golden_out)
        print(f"wrote {count} golden cases to {args.golden_out}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
