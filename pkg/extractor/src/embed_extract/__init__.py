"""Embedding extraction sidecar for the coreference engine.

Runs a pretrained contextual encoder over a tokenized corpus file and
writes the XEMB binary consumed by the engine: one document-summary
vector plus one vector per corpus token, subword vectors mean-pooled to
word level.
"""

__version__ = "0.1.0"
