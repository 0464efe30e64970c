"""Streaming cross-document coreference resolution.

Sequential link prediction over incrementally composed candidate
clusters, for entities and events, with trainers, coreference metrics,
topic pre-clustering, a synthetic-corpus generator, and score-count
benchmarks.
"""

__version__ = "0.1.0"
