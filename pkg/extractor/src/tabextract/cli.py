"""tabextract command line: PDF regions -> record files, vector export."""

import argparse
import logging
import sys

from .extract import AnnotationError, extract_batch, load_annotations, write_records
from .vectors import export_vectors, tokens_from_records, vocabulary


def cmd_extract(args) -> int:
    annotations = load_annotations(args.annotations)
    records, errors = extract_batch(annotations)
    write_records(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    for message in errors:
        print(f"error: {message}", file=sys.stderr)
    return 1 if errors else 0


def cmd_export_vectors(args) -> int:
    vocab = vocabulary(args.vocab, seed=args.seed)
    if args.from_records:
        tokens = tokens_from_records(args.from_records)
    else:
        with open(args.tokens, encoding="utf-8") as fh:
            tokens = [line.strip() for line in fh if line.strip()]
    n = export_vectors(vocab, tokens, args.out)
    print(f"wrote {n} {vocab.dim}-d vectors to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabextract",
        description="Extract annotated table regions from PDFs into record files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="annotations + PDFs -> record file")
    p.add_argument("--annotations", required=True, help="JSON list of table regions")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("export-vectors", help="write a vector file for a token list")
    p.add_argument("--vocab", required=True, choices=["web", "sci"])
    p.add_argument("--out", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--tokens", help="text file, one token per line")
    src.add_argument("--from-records", help="pull tokens from a record file")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_export_vectors)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (AnnotationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
