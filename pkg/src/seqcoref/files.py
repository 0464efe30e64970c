"""Readers and writers for the line-delimited interface files.

Prediction file: {"mention_id", "cluster_id", "chosen_candidate_size",
"probability"} per line.  Topic file: {"doc_id", "topic_id"} per line.
An entity-clusters file is any prediction-shaped file; only mention_id
and cluster_id are consulted.
"""

import json

from .corpus import Clustering
from .errors import MalformedRecord


def write_predictions(doc_steps, path):
    """Write one record per processed mention, in processing order."""
    with open(path, "w", encoding="utf-8") as fh:
        for _, records in doc_steps:
            for r in records:
                fh.write(
                    json.dumps(
                        {
                            "mention_id": r.mention_id,
                            "cluster_id": r.cluster_id,
                            "chosen_candidate_size": r.chosen_size,
                            "probability": r.probability,
                        }
                    )
                    + "\n"
                )


def read_cluster_pairs(path):
    """Raw (mention_id, cluster_id) pairs from a cluster/prediction file.

    Ids are returned verbatim, so pairs from files written against one
    shared engine state can be merged before building a Clustering.
    """
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                pairs.append((rec["mention_id"], rec["cluster_id"]))
            except (json.JSONDecodeError, KeyError, TypeError):
                raise MalformedRecord("bad cluster record", line_no)
    return pairs


def read_clusters(path):
    """Clustering from any line-delimited {mention_id, cluster_id} file."""
    return Clustering.from_labels(read_cluster_pairs(path))


def write_topics(topics, path):
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id in sorted(topics):
            fh.write(json.dumps({"doc_id": doc_id, "topic_id": topics[doc_id]}) + "\n")


def read_topics(path):
    topics = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                topics[rec["doc_id"]] = rec["topic_id"]
            except (json.JSONDecodeError, KeyError, TypeError):
                raise MalformedRecord("bad topic record", line_no)
    return topics


def write_gold_clusters(corpus, kind, path):
    """Export a corpus's gold clustering in the cluster-file shape."""
    gold = corpus.gold_clustering(kind)
    with open(path, "w", encoding="utf-8") as fh:
        for _, m in corpus.mentions_of(kind):
            if m.mention_id in gold:
                fh.write(
                    json.dumps(
                        {"mention_id": m.mention_id, "cluster_id": gold[m.mention_id]}
                    )
                    + "\n"
                )
