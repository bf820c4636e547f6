"""Command-line surface: turn labeled text JSONL into embedding JSONL.

Exit codes: 0 on success, 1 when the invocation or input data is invalid,
2 when a runtime failure occurs (model cannot load, I/O trouble).
"""

from __future__ import annotations

import argparse
import sys

from .encode import DEFAULT_MODEL
from .errors import EmbedderError, ParseError, ValidationError
from .pipeline import embed_file

_USAGE_ERRORS = (ParseError, ValidationError, FileNotFoundError,
                 IsADirectoryError)


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; this tool reserves
    2 for runtime failures, so remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="demasq-embed",
                     description="Encode labeled text records into the "
                                 "embedding JSONL the detector consumes")
    parser.add_argument("--in", dest="in_path", required=True,
                        help="labeled text JSONL input")
    parser.add_argument("--out", required=True,
                        help="embedding JSONL output path")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help="sentence-transformers model name")
    parser.add_argument("--batch", type=int, default=32,
                        help="texts encoded per forward pass")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse help/usage paths
        return int(exc.code or 0)
    try:
        summary = embed_file(args.in_path, args.out, model_name=args.model,
                             batch=args.batch)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EmbedderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if summary.skipped:
        print(f"warning: skipped {summary.skipped} empty text record(s)",
              file=sys.stderr)
    rev = summary.revision or "unpinned"
    print(f"wrote {summary.written} embedding(s) of dimension "
          f"{summary.dimension} to {args.out} "
          f"(model {summary.model}, revision {rev})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
