"""Command-line surface: train, evaluate, classify, zeros.

Exit codes: 0 on success, 1 when the invocation or input data is invalid,
2 when a runtime failure occurs (corrupt model file, singular energy
configuration, I/O trouble).
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import dataio, detector, network, plots
from .bessel import build_table
from .errors import (
    ConfigurationError,
    DemasqError,
    DomainError,
    ParseError,
    ShapeError,
    ValidationError,
)

_USAGE_ERRORS = (ParseError, ValidationError, ConfigurationError, ShapeError,
                 DomainError, FileNotFoundError, IsADirectoryError)


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; this tool reserves
    2 for runtime failures, so remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="demasq",
                     description="Energy-based detector of machine-generated "
                                 "text embeddings")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    t = sub.add_parser("train", help="train a model on labeled embeddings")
    t.add_argument("--data", required=True, help="labeled EmbeddingRecord JSONL")
    t.add_argument("--out", required=True, help="output model weight file")
    t.add_argument("--epochs", type=int, default=12)
    t.add_argument("--lr", type=float, default=1e-4)
    t.add_argument("--batch", type=int, default=64)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--k", type=int, default=20,
                   help="perturbed feature count")
    t.add_argument("--ig-steps", type=int, default=64)
    t.add_argument("--split", type=float, default=0.8,
                   help="train fraction of the stratified split")
    t.add_argument("--no-fundamental-factor", action="store_true",
                   help="drop the first-zero factor from the medium speed "
                        "(makes every label-1 energy singular)")

    e = sub.add_parser("evaluate", help="confusion metrics and energy CSV")
    e.add_argument("--data", required=True, help="labeled EmbeddingRecord JSONL")
    e.add_argument("--model", required=True)
    e.add_argument("--energies-out", required=True, help="per-sample CSV path")
    e.add_argument("--no-figures", action="store_true",
                   help="skip the PNG figures rendered next to the CSV")

    c = sub.add_parser("classify", help="label embeddings with a trained model")
    c.add_argument("--model", required=True)
    c.add_argument("--input", required=True,
                   help="EmbeddingRecord JSONL; labels optional and ignored")
    c.add_argument("--out", required=True, help="verdict CSV path")

    z = sub.add_parser("zeros", help="print the J0 zero table as CSV")
    z.add_argument("--max-order", type=int, required=True)
    return parser


def _cfg_from_args(args) -> detector.TrainingConfig:
    return detector.TrainingConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        batch_size=args.batch,
        seed=args.seed,
        k_features=args.k,
        ig_steps=args.ig_steps,
        medium_includes_fundamental=not args.no_fundamental_factor,
        split_ratio=args.split,
    )


def _cmd_train(args) -> int:
    records = dataio.load_jsonl(args.data)
    cfg = _cfg_from_args(args)
    split = dataio.stratified_split(records, cfg.split_ratio, cfg.seed)
    X, y, _, _ = dataio.to_arrays(split.train)
    result = detector.train(X, y, cfg)
    for entry in result.log:
        print(entry.line())
    if result.skipped_degenerate:
        print(f"warning: skipped {result.skipped_degenerate} degenerate "
              f"sample(s)", file=sys.stderr)
    state = network.init_optimizer(result.params,
                                   learning_rate=cfg.learning_rate)
    network.save(result.params, state, args.out)
    print(f"model written to {args.out}")

    Xt, yt, ids, domains = dataio.to_arrays(split.test)
    summary, _, _ = detector.evaluate(result.params, Xt, yt, cfg,
                                      ids=ids, domains=domains)
    print(f"held-out: samples={Xt.shape[0]} tp={summary.tp} tn={summary.tn} "
          f"fp={summary.fp} fn={summary.fn} tpr={summary.tpr!r} "
          f"tnr={summary.tnr!r}")
    return 0


def _verdict_cfg(params: network.ModelParameters) -> detector.TrainingConfig:
    """Default verdict configuration, with the perturbed feature count
    clamped so models over small embeddings still evaluate."""
    base = detector.TrainingConfig()
    if base.k_features <= params.input_dim:
        return base
    return detector.TrainingConfig(k_features=params.input_dim)


def _metric_table(overall, per_domain, total: int) -> list[str]:
    lines = [f"{'domain':<16}{'samples':>8}{'tpr':>8}{'tnr':>8}"]
    for tag, s in per_domain.items():
        n = s.tp + s.tn + s.fp + s.fn
        lines.append(f"{tag:<16}{n:>8}{100 * s.tpr:>8.1f}{100 * s.tnr:>8.1f}")
    lines.append(f"{'combined':<16}{total:>8}{100 * overall.tpr:>8.1f}"
                 f"{100 * overall.tnr:>8.1f}")
    return lines


def _cmd_evaluate(args) -> int:
    records = dataio.load_jsonl(args.data)
    params, state = network.load(args.model)
    X, y, ids, domains = dataio.to_arrays(records)
    if X.shape[1] != params.input_dim:
        raise ShapeError(
            f"data dimension {X.shape[1]} does not match model input "
            f"dimension {params.input_dim}")
    cfg = _verdict_cfg(params)
    overall, per_domain, rows = detector.evaluate(params, X, y, cfg,
                                                  ids=ids, domains=domains)
    with open(args.energies_out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "true_label", "predicted_label",
                         "probability", "signed_energy", "agreement_count"])
        for rid, true, pred, prob, energy, agree in rows:
            writer.writerow([rid, true, pred, repr(prob), repr(energy), agree])
    for line in _metric_table(overall, per_domain, X.shape[0]):
        print(line)
    if not args.no_figures:
        stem, _ = os.path.splitext(args.energies_out)
        print("figure:",
              plots.save_energy_histogram(rows, stem + "_energy_hist.png"))
        print("figure:",
              plots.save_confusion_matrix(overall, stem + "_confusion.png"))
    return 0


def _cmd_classify(args) -> int:
    records = dataio.load_jsonl(args.input, require_labels=False)
    params, state = network.load(args.model)
    cfg = _verdict_cfg(params)
    table = build_table(params.input_dim)
    skipped = 0
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "predicted_label", "probability",
                         "signed_energy", "agreement_count"])
        for rec in records:
            if rec.embedding.shape[0] != params.input_dim:
                raise ShapeError(
                    f"record {rec.id!r}: dimension {rec.embedding.shape[0]} "
                    f"does not match model input {params.input_dim}")
            if float(np.var(rec.embedding)) <= 1e-12:
                skipped += 1
                print(f"warning: skipping degenerate embedding {rec.id!r}",
                      file=sys.stderr)
                continue
            v = detector.classify(params, rec.embedding, cfg, table)
            writer.writerow([rec.id, v.predicted_label, repr(v.probability),
                             repr(v.signed_energy), v.agreement_count])
    print(f"classified {len(records) - skipped} of {len(records)} record(s)")
    return 0


def _cmd_zeros(args) -> int:
    table = build_table(args.max_order)
    writer = csv.writer(sys.stdout)
    writer.writerow(["n", "zero", "ratio"])
    for n in range(1, table.max_order + 1):
        writer.writerow([n, repr(table.zero(n)), repr(table.ratio(n))])
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "classify": _cmd_classify,
    "zeros": _cmd_zeros,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse help/usage paths
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DemasqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
