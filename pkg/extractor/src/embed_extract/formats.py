"""The two interchange formats this sidecar touches.

Corpus input: line-delimited JSON documents; only `doc_id` and `tokens`
matter here, everything else passes through untouched.

XEMB output: magic b"XEMB", u32 version=1, u32 dim, u64 doc_count, then
per document u32 id_len, utf-8 id, u32 n_tokens, and (n_tokens + 1) * dim
little-endian float32 values with vector 0 the document context vector.
"""

import json
import struct

import numpy as np

_HEADER = struct.Struct("<4sIIQ")
_U32 = struct.Struct("<I")

MAGIC = b"XEMB"
VERSION = 1


class FormatError(Exception):
    pass


def read_corpus_tokens(path):
    """[(doc_id, [token, ...])] in file order; duplicate ids rejected."""
    docs = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                doc_id = record["doc_id"]
                tokens = record["tokens"]
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise FormatError(f"line {line_no}: bad corpus record ({e})")
            if not isinstance(doc_id, str) or not isinstance(tokens, list):
                raise FormatError(f"line {line_no}: bad corpus record")
            if doc_id in seen:
                raise FormatError(f"line {line_no}: duplicate doc_id '{doc_id}'")
            seen.add(doc_id)
            docs.append((doc_id, [str(t) for t in tokens]))
    return docs


def write_xemb(path, dim, documents):
    """Write (doc_id, context_vec, token_matrix) triples as an XEMB file."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, dim, len(documents)))
        for doc_id, context, tokens in documents:
            context = np.asarray(context, dtype="<f4").reshape(-1)
            tokens = np.asarray(tokens, dtype="<f4").reshape(-1, dim)
            if context.shape != (dim,):
                raise FormatError(f"{doc_id}: context vector has wrong dim")
            ident = doc_id.encode("utf-8")
            fh.write(_U32.pack(len(ident)))
            fh.write(ident)
            fh.write(_U32.pack(tokens.shape[0]))
            fh.write(context.tobytes())
            fh.write(tokens.tobytes())
