"""Command line: extract --corpus --encoder [--max-len 600] --out.

The run summary (document count, truncated-document count, emitted dim)
goes to stderr as one JSON line; exit 0 on success, 1 on any input or
encoder failure.
"""

import argparse
import json
import sys

from .extract import (
    EncoderUnavailable,
    ExtractJob,
    TokenAlignmentFailure,
    extract,
)
from .formats import FormatError


def main(argv=None):
    parser = argparse.ArgumentParser(prog="extract", description=__doc__)
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--encoder", required=True,
                        help="model name or local checkpoint directory")
    parser.add_argument("--max-len", type=int, default=600, dest="max_len",
                        help="maximum document length in encoder tokens")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        summary = extract(ExtractJob(
            corpus_path=args.corpus,
            encoder=args.encoder,
            max_len=args.max_len,
            out_path=args.out,
        ))
    except (EncoderUnavailable, TokenAlignmentFailure, FormatError,
            OSError) as e:
        print(json.dumps({"error": type(e).__name__, "detail": str(e)}),
              file=sys.stderr)
        return 1
    print(
        json.dumps(
            {
                "documents": summary.documents,
                "truncated": summary.truncated,
                "dim": summary.dim,
            }
        ),
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
