"""Extraction sidecar: format round trips, alignment, engine integration.

The integration tests drive the coreference engine strictly through its
installed CLI and file formats; a tiny randomly initialized local BERT
stands in for a real pretrained encoder.
"""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from embed_extract.cli import main
from embed_extract.extract import (
    EncoderUnavailable,
    ExtractJob,
    TokenAlignmentFailure,
    extract,
)

DOCS = [
    ("news1", "the storm hit the northern coast late tuesday".split(),
     [("news1_m0", 1, 1, "storm-a"), ("news1_m1", 5, 5, "coast-a")]),
    ("news2", "a second storm flooded the same coast region".split(),
     [("news2_m0", 2, 2, "storm-a"), ("news2_m1", 6, 6, "coast-a")]),
    ("news3", "officials said the flood damaged two bridges".split(),
     [("news3_m0", 3, 3, "flood-b"), ("news3_m1", 6, 6, "bridge-b")]),
    ("news4", "the bridges reopened after the flood receded".split(),
     [("news4_m0", 1, 1, "bridge-b"), ("news4_m1", 5, 5, "flood-b")]),
    ("news5", "residents returned home as the water level fell".split(),
     [("news5_m0", 0, 0, "residents-c")]),
]


def write_toy_corpus(path):
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id, tokens, mentions in DOCS:
            record = {
                "doc_id": doc_id,
                "topic_gold": "storm" if doc_id in ("news1", "news2") else "flood",
                "tokens": tokens,
                "mentions": [
                    {"mention_id": mid, "kind": "entity", "start": s, "end": e,
                     "gold_cluster": gold, "entity_type": "OTHER"}
                    for mid, s, e, gold in mentions
                ],
            }
            fh.write(json.dumps(record) + "\n")


@pytest.fixture(scope="session")
def tiny_encoder(tmp_path_factory):
    import torch
    from transformers import BertConfig, BertModel, BertTokenizerFast

    d = tmp_path_factory.mktemp("encoder")
    words = sorted({w for _, tokens, _ in DOCS for w in tokens})
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + words
    (d / "vocab.txt").write_text("\n".join(vocab))
    tokenizer = BertTokenizerFast(vocab_file=str(d / "vocab.txt"),
                                  do_lower_case=True)
    tokenizer.save_pretrained(d)
    torch.manual_seed(0)
    config = BertConfig(
        vocab_size=len(vocab), hidden_size=32, num_hidden_layers=2,
        num_attention_heads=4, intermediate_size=64,
        max_position_embeddings=64,
    )
    BertModel(config).save_pretrained(d)
    return str(d)


@pytest.fixture
def toy_corpus(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_toy_corpus(path)
    return path


class TestExtract:
    def test_vector_counts(self, tmp_path, tiny_encoder, toy_corpus):
        out = tmp_path / "emb.xemb"
        summary = extract(ExtractJob(str(toy_corpus), tiny_encoder,
                                     out_path=str(out)))
        assert summary.documents == 5
        assert summary.truncated == 0
        assert summary.dim == 32
        from seqcoref.corpus import load_corpus
        from seqcoref.embeddings import load_embeddings

        corpus = load_corpus(toy_corpus)
        store = load_embeddings(out, corpus, expected_dim=32)
        for doc_id, tokens, _ in DOCS:
            assert store.tokens(doc_id).shape == (len(tokens), 32)
            assert store.context(doc_id).shape == (32,)

    def test_deterministic(self, tmp_path, tiny_encoder, toy_corpus):
        a, b = tmp_path / "a.xemb", tmp_path / "b.xemb"
        extract(ExtractJob(str(toy_corpus), tiny_encoder, out_path=str(a)))
        extract(ExtractJob(str(toy_corpus), tiny_encoder, out_path=str(b)))
        assert a.read_bytes() == b.read_bytes()

    def test_truncation_warns_and_zero_pads(self, tmp_path, tiny_encoder,
                                            toy_corpus):
        out = tmp_path / "short.xemb"
        # window of 6 encoder tokens = CLS + 4 words + SEP; the rest is cut
        summary = extract(ExtractJob(str(toy_corpus), tiny_encoder,
                                     max_len=6, out_path=str(out)))
        assert summary.truncated == 5
        from seqcoref.corpus import load_corpus
        from seqcoref.embeddings import load_embeddings

        store = load_embeddings(out, load_corpus(toy_corpus))
        tail = store.tokens("news1")[5:]
        np.testing.assert_array_equal(tail, np.zeros_like(tail))
        assert np.abs(store.tokens("news1")[:4]).sum() > 0

    def test_unavailable_encoder(self, tmp_path, toy_corpus):
        with pytest.raises(EncoderUnavailable):
            extract(ExtractJob(str(toy_corpus), str(tmp_path / "nothing"),
                               out_path=str(tmp_path / "x.xemb")))

    def test_empty_token_rejected(self, tmp_path, tiny_encoder):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(
            {"doc_id": "d", "tokens": ["ok", " "], "mentions": []}) + "\n")
        with pytest.raises(TokenAlignmentFailure):
            extract(ExtractJob(str(path), tiny_encoder,
                               out_path=str(tmp_path / "x.xemb")))


class TestCli:
    def test_summary_on_stderr(self, tmp_path, tiny_encoder, toy_corpus,
                               capsys):
        out = tmp_path / "emb.xemb"
        code = main(["--corpus", str(toy_corpus), "--encoder", tiny_encoder,
                     "--out", str(out)])
        assert code == 0
        err = capsys.readouterr().err
        summary = json.loads(err.strip().splitlines()[-1])
        assert summary == {"documents": 5, "truncated": 0, "dim": 32}

    def test_error_exit_code(self, tmp_path, toy_corpus, capsys):
        code = main(["--corpus", str(toy_corpus), "--encoder",
                     str(tmp_path / "ghost"), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "EncoderUnavailable" in capsys.readouterr().err


class TestEngineIntegration:
    def test_drives_infer_end_to_end(self, tmp_path, tiny_encoder, toy_corpus):
        """Extract embeddings for the toy text corpus, train a throwaway
        model through the engine CLI, and run inference to completion."""
        emb = tmp_path / "emb.xemb"
        assert main(["--corpus", str(toy_corpus), "--encoder", tiny_encoder,
                     "--out", str(emb)]) == 0

        config = tmp_path / "config.json"
        config.write_text(json.dumps({
            "d_arg": 3, "d_f": 2, "k": 1, "d_p": 3, "K_topics": 2,
            "max_epochs": 2, "patience": 1, "seed": 0,
        }))
        model = tmp_path / "model.ckpt"
        pred = tmp_path / "pred.jsonl"

        def engine(*args):
            return subprocess.run(
                [sys.executable, "-m", "seqcoref.cli", *args],
                capture_output=True, text=True,
            )

        r = engine("train", "--corpus", str(toy_corpus),
                   "--embeddings", str(emb),
                   "--dev-corpus", str(toy_corpus),
                   "--dev-embeddings", str(emb),
                   "--mode", "entity", "--config", str(config),
                   "--out", str(model))
        assert r.returncode == 0, r.stderr
        r = engine("infer", "--corpus", str(toy_corpus),
                   "--embeddings", str(emb), "--model", str(model),
                   "--out", str(pred))
        assert r.returncode == 0, r.stderr
        lines = [json.loads(l) for l in pred.read_text().splitlines()]
        assert len(lines) == 9  # every toy-corpus entity mention
        r = engine("eval", "--pred", str(pred), "--gold", str(toy_corpus))
        assert r.returncode == 0, r.stderr
        report = json.loads(r.stdout.strip())
        assert 0.0 <= report["conll"] <= 1.0
