"""Encoder forward pass and subword-to-word pooling."""

from dataclasses import dataclass

import numpy as np

from .formats import read_corpus_tokens, write_xemb


class EncoderUnavailable(Exception):
    """The requested encoder could not be loaded locally."""


class TokenAlignmentFailure(Exception):
    """A corpus token inside the encoded window produced no subwords."""


@dataclass
class ExtractJob:
    corpus_path: str
    encoder: str
    max_len: int = 600
    out_path: str = "embeddings.xemb"


@dataclass
class ExtractSummary:
    documents: int
    truncated: int
    dim: int


def load_encoder(name_or_path):
    try:
        import torch
        from transformers import AutoModel, AutoTokenizer
    except ImportError as e:
        raise EncoderUnavailable(f"transformers/torch not installed: {e}")
    try:
        tokenizer = AutoTokenizer.from_pretrained(name_or_path)
        model = AutoModel.from_pretrained(name_or_path)
    except Exception as e:
        raise EncoderUnavailable(f"cannot load encoder '{name_or_path}': {e}")
    if not tokenizer.is_fast:
        raise EncoderUnavailable(
            "a fast tokenizer is required for subword-to-word alignment"
        )
    model.eval()  # dropout off: extraction must be deterministic
    return tokenizer, model


def _encode_document(tokens, tokenizer, model, max_len):
    """(context_vec, word_matrix, truncated_words) for one document.

    Words cut off by the encoder window keep their slot in the output
    matrix as zero vectors so the XEMB token count always matches the
    corpus; the caller reports how many words were cut.
    """
    import torch

    dim = model.config.hidden_size
    if not tokens:
        ids = tokenizer.build_inputs_with_special_tokens([])
        with torch.no_grad():
            hidden = model(torch.tensor([ids])).last_hidden_state[0]
        return hidden[0].numpy(), np.zeros((0, dim), dtype=np.float32), 0

    for i, t in enumerate(tokens):
        if not t.strip():
            raise TokenAlignmentFailure(f"token {i} is empty or whitespace")
    enc = tokenizer(
        tokens,
        is_split_into_words=True,
        truncation=True,
        max_length=max_len,
        return_tensors="pt",
    )
    with torch.no_grad():
        hidden = model(**enc).last_hidden_state[0]
    word_ids = enc.word_ids(0)
    by_word = {}
    for pos, wid in enumerate(word_ids):
        if wid is not None:
            by_word.setdefault(wid, []).append(pos)
    covered = max(by_word) + 1 if by_word else 0
    vectors = np.zeros((len(tokens), dim), dtype=np.float32)
    truncated = 0
    hidden_np = hidden.numpy()
    for w in range(len(tokens)):
        if w in by_word:
            vectors[w] = hidden_np[by_word[w]].mean(axis=0)
        elif w < covered:
            raise TokenAlignmentFailure(
                f"word {w} ('{tokens[w]}') inside the window has no subwords"
            )
        else:
            truncated += 1  # cut off by the max-length window
    return hidden_np[0], vectors, truncated


def extract(job):
    """Run the encoder over every document and write the XEMB file."""
    tokenizer, model = load_encoder(job.encoder)
    docs = read_corpus_tokens(job.corpus_path)
    dim = model.config.hidden_size
    encoded = []
    truncated_docs = 0
    for doc_id, tokens in docs:
        context, vectors, cut = _encode_document(tokens, tokenizer, model,
                                                 job.max_len)
        truncated_docs += cut > 0
        encoded.append((doc_id, context, vectors))
    write_xemb(job.out_path, dim, encoded)
    return ExtractSummary(documents=len(encoded), truncated=truncated_docs,
                          dim=dim)
