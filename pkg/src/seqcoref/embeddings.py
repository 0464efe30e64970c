"""Binary XEMB embedding file: per-document context + token vectors.

Layout (all integers little-endian):

    magic   4 bytes  b"XEMB"
    version u32      1
    dim     u32
    doc_count u64
    per document:
        id_len   u32
        id       id_len bytes, utf-8
        n_tokens u32
        vectors  (n_tokens + 1) * dim little-endian f32;
                 vector 0 is the document context vector

Vectors are stored and kept in memory as float32 so a write/read round
trip is byte-identical.
"""

import struct

import numpy as np

from .errors import (
    CorruptEmbedding,
    DimMismatch,
    MissingDocument,
    TruncatedFile,
)

MAGIC = b"XEMB"
VERSION = 1

_HEADER = struct.Struct("<4sIIQ")
_U32 = struct.Struct("<I")


class EmbeddingStore:
    """Fixed-dimension context and token vectors keyed by doc_id."""

    def __init__(self, dim):
        if dim <= 0:
            raise DimMismatch(f"embedding dim must be positive, got {dim}")
        self.dim = dim
        self._context = {}
        self._tokens = {}

    def add(self, doc_id, context_vec, token_vecs):
        ctx = np.asarray(context_vec, dtype=np.float32).reshape(-1)
        toks = np.asarray(token_vecs, dtype=np.float32)
        if toks.size == 0:
            toks = toks.reshape(0, self.dim)
        if ctx.shape != (self.dim,) or toks.ndim != 2 or toks.shape[1] != self.dim:
            raise DimMismatch(
                f"doc {doc_id}: vectors do not match dim {self.dim}"
            )
        if not (np.isfinite(ctx).all() and np.isfinite(toks).all()):
            raise CorruptEmbedding(f"doc {doc_id}: non-finite embedding values")
        self._context[doc_id] = ctx
        self._tokens[doc_id] = toks

    def doc_ids(self):
        return list(self._context)

    def __contains__(self, doc_id):
        return doc_id in self._context

    def context(self, doc_id):
        if doc_id not in self._context:
            raise MissingDocument(f"no embeddings for document '{doc_id}'")
        return self._context[doc_id]

    def tokens(self, doc_id):
        if doc_id not in self._tokens:
            raise MissingDocument(f"no embeddings for document '{doc_id}'")
        return self._tokens[doc_id]

    def token(self, doc_id, index):
        return self.tokens(doc_id)[index]


def write_embeddings(store, path):
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, store.dim, len(store.doc_ids())))
        for doc_id in store.doc_ids():
            ident = doc_id.encode("utf-8")
            fh.write(_U32.pack(len(ident)))
            fh.write(ident)
            toks = store.tokens(doc_id)
            fh.write(_U32.pack(toks.shape[0]))
            block = np.concatenate([store.context(doc_id)[None, :], toks], axis=0)
            fh.write(block.astype("<f4").tobytes())


def load_embeddings(path, corpus=None, expected_dim=None):
    """Read an XEMB file, validating coverage against `corpus` if given."""
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _HEADER.size:
        raise TruncatedFile(f"{path}: shorter than the XEMB header")
    magic, version, dim, doc_count = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise TruncatedFile(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise TruncatedFile(f"{path}: unsupported version {version}")
    if expected_dim is not None and dim != expected_dim:
        raise DimMismatch(f"{path}: file dim {dim} != expected {expected_dim}")
    store = EmbeddingStore(dim)
    off = _HEADER.size
    for _ in range(doc_count):
        if off + _U32.size > len(buf):
            raise TruncatedFile(f"{path}: truncated document header")
        (id_len,) = _U32.unpack_from(buf, off)
        off += _U32.size
        if off + id_len + _U32.size > len(buf):
            raise TruncatedFile(f"{path}: truncated document id")
        doc_id = buf[off : off + id_len].decode("utf-8")
        off += id_len
        (n_tokens,) = _U32.unpack_from(buf, off)
        off += _U32.size
        n_vals = (n_tokens + 1) * dim
        if off + 4 * n_vals > len(buf):
            raise TruncatedFile(f"{path}: truncated vectors for '{doc_id}'")
        block = np.frombuffer(buf, dtype="<f4", count=n_vals, offset=off)
        off += 4 * n_vals
        block = block.reshape(n_tokens + 1, dim)
        store.add(doc_id, block[0], block[1:])
    if corpus is not None:
        for doc in corpus.documents:
            if doc.doc_id not in store:
                raise MissingDocument(
                    f"{path}: corpus document '{doc.doc_id}' has no embeddings"
                )
            n = store.tokens(doc.doc_id).shape[0]
            if n != len(doc.tokens):
                raise DimMismatch(
                    f"{path}: document '{doc.doc_id}' has {n} token vectors "
                    f"for {len(doc.tokens)} tokens"
                )
    return store
